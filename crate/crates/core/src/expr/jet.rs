//! Jet variables: a field component together with a derivative multi-index.

use std::fmt;

/// How a symbol behaves under variation and total differentiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// A dynamical field: varied, and differentiated along every coordinate.
    Field,
    /// A non-varied background symbol. Bit `i` of `frozen` set means the
    /// symbol is constant along coordinate `i`.
    Background { frozen: u16 },
}

impl VarKind {
    pub const CONSTANT: VarKind = VarKind::Background { frozen: u16::MAX };

    pub fn is_varied(self) -> bool {
        matches!(self, VarKind::Field)
    }

    pub fn constant_along(self, coord: usize) -> bool {
        match self {
            VarKind::Field => false,
            VarKind::Background { frozen } => coord >= 16 || frozen & (1 << coord) != 0,
        }
    }
}

/// A field component and its derivative multi-index.
///
/// Ordering is lexicographic on `(field, component, deriv)`, which fixes the
/// monomial order of every normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub field: String,
    pub component: Vec<u8>,
    /// Sorted multiset of coordinate indices.
    pub deriv: Vec<u8>,
    pub kind: VarKind,
}

impl JetVar {
    pub fn field(name: &str, component: &[u8]) -> Self {
        JetVar {
            field: name.to_string(),
            component: component.to_vec(),
            deriv: Vec::new(),
            kind: VarKind::Field,
        }
    }

    pub fn background(name: &str, component: &[u8], frozen: u16) -> Self {
        JetVar {
            field: name.to_string(),
            component: component.to_vec(),
            deriv: Vec::new(),
            kind: VarKind::Background { frozen },
        }
    }

    pub fn constant(name: &str) -> Self {
        JetVar::background(name, &[], u16::MAX)
    }

    /// Jet order, i.e. the number of derivative indices.
    pub fn order(&self) -> usize {
        self.deriv.len()
    }

    pub fn is_varied(&self) -> bool {
        self.kind.is_varied()
    }

    /// This variable with one more derivative along `coord`.
    pub fn with_deriv(&self, coord: u8) -> Self {
        let mut out = self.clone();
        let pos = out.deriv.partition_point(|&d| d <= coord);
        out.deriv.insert(pos, coord);
        out
    }

    pub fn with_derivs(&self, coords: &[u8]) -> Self {
        coords.iter().fold(self.clone(), |v, &c| v.with_deriv(c))
    }

    /// This variable with one derivative along `coord` removed, if present.
    pub fn without_deriv(&self, coord: u8) -> Option<Self> {
        let pos = self.deriv.iter().position(|&d| d == coord)?;
        let mut out = self.clone();
        out.deriv.remove(pos);
        Some(out)
    }

    /// The underlying undifferentiated component.
    pub fn base(&self) -> Self {
        JetVar {
            deriv: Vec::new(),
            ..self.clone()
        }
    }

    pub fn count_deriv(&self, coord: u8) -> usize {
        self.deriv.iter().filter(|&&d| d == coord).count()
    }

    /// Text form. Derivatives along `transversal` print as trailing primes,
    /// every other derivative as a `d[i]` prefix.
    pub fn render(&self, transversal: Option<usize>) -> String {
        let mut s = String::new();
        let mut primes = 0;
        for &d in &self.deriv {
            if Some(d as usize) == transversal {
                primes += 1;
            } else {
                s.push_str(&format!("d[{d}]"));
            }
        }
        s.push_str(&self.field);
        if !self.component.is_empty() {
            let comps: Vec<String> = self.component.iter().map(|c| c.to_string()).collect();
            s.push('[');
            s.push_str(&comps.join(","));
            s.push(']');
        }
        for _ in 0..primes {
            s.push('\'');
        }
        s
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deriv_multiset_stays_sorted() {
        let v = JetVar::field("phi", &[]).with_deriv(2).with_deriv(0).with_deriv(1);
        assert_eq!(v.deriv, vec![0, 1, 2]);
        assert_eq!(v.without_deriv(1).unwrap().deriv, vec![0, 2]);
        assert!(v.without_deriv(3).is_none());
    }

    #[test]
    fn render_uses_primes_for_transversal() {
        let v = JetVar::field("A", &[2]).with_deriv(0).with_deriv(1);
        assert_eq!(v.render(Some(0)), "d[1]A[2]'");
        assert_eq!(v.render(None), "d[0]d[1]A[2]");
    }

    #[test]
    fn frozen_backgrounds() {
        let k = VarKind::Background { frozen: 0b1 };
        assert!(k.constant_along(0));
        assert!(!k.constant_along(1));
        assert!(VarKind::CONSTANT.constant_along(3));
        assert!(!VarKind::Field.constant_along(0));
    }
}
