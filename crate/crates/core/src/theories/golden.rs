//! Stored expectations for the shipped theories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TheoryError;

/// Normal-form text of the derived structures, keyed by the varied symbol,
/// the generator product or the constraint name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derived {
    pub el: BTreeMap<String, String>,
    pub alpha: BTreeMap<String, String>,
    pub omega: BTreeMap<String, String>,
    pub constraints: BTreeMap<String, String>,
}

/// A numeric quantity of a lattice check with its accepted band
/// `|value - expected| <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeTarget {
    pub quantity: String,
    pub expected: f64,
    pub tolerance: f64,
    /// How the expected value was obtained.
    pub oracle: String,
}

impl LatticeTarget {
    pub fn new(quantity: &str, expected: f64, tolerance: f64, oracle: &str) -> Self {
        LatticeTarget {
            quantity: quantity.to_string(),
            expected,
            tolerance,
            oracle: oracle.to_string(),
        }
    }

    pub fn accepts(&self, value: f64) -> bool {
        (value - self.expected).abs() <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenReport {
    pub theory: String,
    pub derived: Derived,
    /// Pointwise kernel data, compared against the pointwise check tallies.
    #[serde(default)]
    pub kernel: BTreeMap<String, i64>,
    #[serde(default)]
    pub lattice: Vec<LatticeTarget>,
}

pub fn golden_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "mechanics" => include_str!("../../goldens/mechanics.json"),
        "length" => include_str!("../../goldens/length.json"),
        "scalar" => include_str!("../../goldens/scalar.json"),
        "em" => include_str!("../../goldens/em.json"),
        "pc4" => include_str!("../../goldens/pc4.json"),
        _ => return None,
    })
}

pub fn golden(name: &str) -> Result<GoldenReport, TheoryError> {
    let src = golden_source(name).ok_or_else(|| TheoryError::Unknown(name.to_string()))?;
    serde_json::from_str(src).map_err(|e| TheoryError::Golden {
        name: name.to_string(),
        message: e.to_string(),
    })
}

/// Numeric targets for each shipped theory.
pub fn lattice_targets(name: &str) -> Vec<LatticeTarget> {
    let t = LatticeTarget::new;
    match name {
        "mechanics" => vec![
            t("max_error", 0.0, 1e-12, "closed form X = (v, -V'(q)/m)"),
            t("max_residual", 0.0, 1e-10, "nondegenerate two-form"),
        ],
        "length" => vec![
            t("min_rank", 4.0, 0.0, "brute-force rank of the constrained form"),
            t("max_rank", 4.0, 0.0, "brute-force rank of the constrained form"),
            t("min_cosine", 1.0, 1e-10, "kernel along (u, 0)"),
        ],
        "scalar" => vec![
            t("rank_deficit", 0.0, 0.0, "constant nondegenerate pairing"),
            t("order", 3.0, 0.2, "time-reversal symmetry of the linear flow"),
        ],
        "em" => vec![
            t("gauge_a_error", 0.0, 1e-10, "X_λ moves A by D_i λ"),
            t("gauge_f0", 0.0, 1e-10, "X_λ leaves F_0 fixed"),
            t("gauge_residual", 0.0, 1e-10, "gauge generator lies in the image"),
            t("max_bracket", 0.0, 1e-10, "J_μ does not depend on A"),
            t("gauge_null_pairing", 0.0, 1e-10, "discrete integration by parts"),
            t("gauss_drift", 0.0, 1e-12, "telescoping discrete divergence"),
        ],
        "pc4" => vec![
            t("min_kernel_dim", 6.0, 0.0, "exact kernel of e ∧ (·)"),
            t("max_kernel_dim", 6.0, 0.0, "exact kernel of e ∧ (·)"),
            t("max_e_error", 0.0, 1e-8, "infinitesimal Lorentz action c·e"),
            t("max_residual", 0.0, 1e-8, "gauge generator lies in the image"),
            t("coisotropic", 1.0, 0.0, "first-class constraints"),
        ],
        _ => Vec::new(),
    }
}

/// Pointwise expectations; only the tetrad theory has any.
pub fn kernel_targets(name: &str) -> BTreeMap<String, i64> {
    let mut m = BTreeMap::new();
    if name == "pc4" {
        m.insert("coframe_kernel_dim".to_string(), 6);
        m.insert("injective_w21".to_string(), 1);
        m.insert("structural_exact".to_string(), 1);
    }
    m
}
