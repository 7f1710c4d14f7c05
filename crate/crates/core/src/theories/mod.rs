//! Built-in theories and their golden derived structures.

mod golden;
mod pc4;

use thiserror::Error;

use crate::calc_var::TheorySpec;
use crate::cli::{parse_theory, DslError};

pub use golden::{golden, golden_source, kernel_targets, lattice_targets, Derived, GoldenReport, LatticeTarget};
pub use pc4::theory as pc4_from_terms;

pub const NAMES: [&str; 5] = ["mechanics", "length", "scalar", "em", "pc4"];

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("unknown theory `{0}`")]
    Unknown(String),
    #[error("shipped theory `{name}` does not parse: {source}")]
    Shipped { name: String, source: DslError },
    #[error("golden data for `{name}` is malformed: {message}")]
    Golden { name: String, message: String },
}

/// Source text of a shipped theory file.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "mechanics" => include_str!("../../theories/mechanics.theory"),
        "length" => include_str!("../../theories/length.theory"),
        "scalar" => include_str!("../../theories/scalar.theory"),
        "em" => include_str!("../../theories/em.theory"),
        "pc4" => include_str!("../../theories/pc4.theory"),
        _ => return None,
    })
}

pub fn builtin(name: &str) -> Result<TheorySpec, TheoryError> {
    let src = source(name).ok_or_else(|| TheoryError::Unknown(name.to_string()))?;
    parse_theory(src).map_err(|source| TheoryError::Shipped {
        name: name.to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses() {
        for n in NAMES {
            let t = builtin(n).unwrap();
            assert_eq!(t.name, n);
            t.validate().unwrap();
        }
        assert!(matches!(builtin("yang-mills"), Err(TheoryError::Unknown(_))));
    }

    #[test]
    fn shipped_pc4_matches_term_builder() {
        assert_eq!(builtin("pc4").unwrap(), pc4_from_terms());
    }
}
