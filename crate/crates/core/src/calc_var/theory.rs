//! Declarative description of a Lagrangian field theory.

use crate::expr::{Expr, JetVar, Notation, SymbolTable, VarKind};

use super::VarError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    /// Number of base-coordinate indices (written after internal ones).
    pub base: usize,
    /// Number of internal indices.
    pub internal: usize,
    /// Range of each internal index; defaults to the base dimension.
    pub idim: Option<usize>,
    /// The first two internal indices are antisymmetric (stored with `c < d`).
    pub antisym: bool,
    /// The first two indices are symmetric (stored with `c <= d`).
    pub sym: bool,
    pub positive: bool,
    /// Lives only on the boundary (introduced by a substitution rule).
    pub boundary: bool,
}

impl FieldDecl {
    pub fn scalar(name: &str) -> Self {
        FieldDecl {
            name: name.to_string(),
            base: 0,
            internal: 0,
            idim: None,
            antisym: false,
            sym: false,
            positive: false,
            boundary: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackgroundDecl {
    pub name: String,
    pub indices: usize,
    /// Indices range over the non-transversal coordinates only.
    pub spatial: bool,
    pub sym: bool,
    pub positive: bool,
    /// Bit `i` set: constant along coordinate `i`.
    pub frozen: u16,
}

impl BackgroundDecl {
    pub fn constant(name: &str) -> Self {
        BackgroundDecl {
            name: name.to_string(),
            indices: 0,
            spatial: false,
            sym: false,
            positive: false,
            frozen: u16::MAX,
        }
    }
}

/// Split metric `g = -(dt)^2 + h_ij dx^i dx^j`, exposed through the
/// backgrounds `{h}inv[i,j]` (inverse spatial metric) and `sqrt{h}`
/// (square root of its determinant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSplit {
    pub name: String,
    pub time_independent: bool,
}

impl MetricSplit {
    pub fn inverse_name(&self) -> String {
        format!("{}inv", self.name)
    }

    pub fn sqrt_det_name(&self) -> String {
        format!("sqrt{}", self.name)
    }
}

/// Replaces a jet on the boundary by an expression in boundary symbols;
/// extra tangential derivatives are carried through by prolongation.
#[derive(Clone, Debug, PartialEq)]
pub struct Substitution {
    pub lhs: JetVar,
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheorySpec {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub transversal: usize,
    pub fields: Vec<FieldDecl>,
    pub backgrounds: Vec<BackgroundDecl>,
    pub functions: Vec<String>,
    pub metric_split: Option<MetricSplit>,
    pub substitutions: Vec<Substitution>,
    pub lagrangian: Expr,
    pub jet_order: usize,
}

impl TheorySpec {
    pub fn new(name: &str, coords: &[&str], transversal: usize) -> Self {
        TheorySpec {
            name: name.to_string(),
            dim: coords.len(),
            coords: coords.iter().map(|s| s.to_string()).collect(),
            transversal,
            fields: Vec::new(),
            backgrounds: Vec::new(),
            functions: Vec::new(),
            metric_split: None,
            substitutions: Vec::new(),
            lagrangian: Expr::zero(),
            jet_order: 1,
        }
    }

    /// Rendering with primes or dots along the transversal coordinate, also
    /// for the restricted boundary symbols named after it.
    pub fn notation(&self) -> Notation {
        let n = Notation::with_transversal(self.transversal);
        let mut name = self.coords[self.transversal].chars();
        match (name.next(), name.next()) {
            (Some(c), None) => n.dotting(c),
            _ => n,
        }
    }

    pub fn tangential(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| i != self.transversal).collect()
    }

    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn background(&self, name: &str) -> Option<BackgroundDecl> {
        if let Some(b) = self.backgrounds.iter().find(|b| b.name == name) {
            return Some(b.clone());
        }
        let split = self.metric_split.as_ref()?;
        let frozen = if split.time_independent { 1u16 << self.transversal } else { 0 };
        if name == split.inverse_name() {
            Some(BackgroundDecl {
                name: name.to_string(),
                indices: 2,
                spatial: true,
                sym: true,
                positive: false,
                frozen,
            })
        } else if name == split.sqrt_det_name() {
            Some(BackgroundDecl {
                name: name.to_string(),
                indices: 0,
                spatial: false,
                sym: false,
                positive: true,
                frozen,
            })
        } else {
            None
        }
    }

    /// Every stored component index tuple of a field.
    pub fn components(&self, f: &FieldDecl) -> Vec<Vec<u8>> {
        let idim = f.idim.unwrap_or(self.dim);
        let mut ranges = vec![idim; f.internal];
        ranges.extend(std::iter::repeat_n(self.dim, f.base));
        let mut out = Vec::new();
        for comp in index_tuples(&ranges) {
            if (f.antisym && comp[0] >= comp[1]) || (f.sym && comp[0] > comp[1]) {
                continue;
            }
            out.push(comp);
        }
        out
    }

    /// Jet variables of the bulk fields at derivative order zero.
    pub fn field_components(&self) -> Vec<JetVar> {
        let mut out = Vec::new();
        for f in self.fields.iter().filter(|f| !f.boundary) {
            for c in self.components(f) {
                out.push(JetVar::field(&f.name, &c));
            }
        }
        out
    }

    fn check_component(
        &self,
        name: &str,
        comp: &[u8],
        ranges: &[usize],
        antisym: bool,
        sym: bool,
    ) -> Result<(), String> {
        if comp.len() != ranges.len() {
            return Err(format!(
                "`{name}` takes {} indices, got {}",
                ranges.len(),
                comp.len()
            ));
        }
        for (c, r) in comp.iter().zip(ranges) {
            if *c as usize >= *r {
                return Err(format!("index {c} of `{name}` out of range"));
            }
        }
        if antisym && comp[0] >= comp[1] {
            return Err(format!("antisymmetric `{name}` is stored with increasing first indices"));
        }
        if sym && comp[0] > comp[1] {
            return Err(format!("symmetric `{name}` is stored with non-decreasing first indices"));
        }
        Ok(())
    }

    pub fn max_jet_order(&self) -> usize {
        crate::expr::DEFAULT_MAX_JET_ORDER.max(2 * self.jet_order)
    }

    /// Checks the invariants that parsing cannot enforce locally.
    pub fn validate(&self) -> Result<(), VarError> {
        if self.coords.len() != self.dim || self.transversal >= self.dim {
            return Err(VarError::Malformed("exactly one transversal coordinate is required".into()));
        }
        for v in self.lagrangian.vars() {
            if self.var_kind(&v.field, &v.component).is_err() {
                return Err(VarError::Malformed(format!("undeclared symbol `{}`", v.field)));
            }
            if v.order() > self.jet_order {
                return Err(VarError::Malformed(format!(
                    "jet `{}` exceeds declared jet order {}",
                    v, self.jet_order
                )));
            }
        }
        Ok(())
    }
}

fn index_tuples(ranges: &[usize]) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for &r in ranges {
        let mut next = Vec::new();
        for prefix in &out {
            for i in 0..r {
                let mut p = prefix.clone();
                p.push(i as u8);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

impl SymbolTable for TheorySpec {
    fn transversal(&self) -> usize {
        self.transversal
    }

    fn var_kind(&self, name: &str, comp: &[u8]) -> Result<VarKind, String> {
        if let Some(f) = self.field(name) {
            let idim = f.idim.unwrap_or(self.dim);
            let mut ranges = vec![idim; f.internal];
            ranges.extend(std::iter::repeat_n(self.dim, f.base));
            self.check_component(name, comp, &ranges, f.antisym, f.sym)?;
            return Ok(VarKind::Field);
        }
        if let Some(b) = self.background(name) {
            if b.spatial && comp.iter().any(|&c| c as usize == self.transversal) {
                return Err(format!("`{name}` takes spatial indices only"));
            }
            let ranges = vec![self.dim; b.indices];
            self.check_component(name, comp, &ranges, false, b.sym)?;
            return Ok(VarKind::Background { frozen: b.frozen });
        }
        Err(format!("undeclared symbol `{name}`"))
    }

    fn is_function(&self, name: &str) -> bool {
        self.functions.iter().any(|f| f == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antisymmetric_components() {
        let mut t = TheorySpec::new("pc", &["t", "x", "y", "z"], 0);
        t.fields.push(FieldDecl {
            internal: 2,
            base: 1,
            antisym: true,
            ..FieldDecl::scalar("w")
        });
        assert_eq!(t.components(&t.fields[0]).len(), 24);
        assert!(t.var_kind("w", &[0, 1, 3]).is_ok());
        assert!(t.var_kind("w", &[1, 0, 3]).is_err());
        assert!(t.var_kind("v", &[]).is_err());
    }

    #[test]
    fn split_metric_backgrounds() {
        let mut t = TheorySpec::new("s", &["t", "x"], 0);
        t.metric_split = Some(MetricSplit {
            name: "h".into(),
            time_independent: true,
        });
        assert_eq!(
            t.var_kind("hinv", &[1, 1]),
            Ok(VarKind::Background { frozen: 1 })
        );
        assert!(t.var_kind("hinv", &[0, 1]).is_err());
        assert!(t.var_kind("sqrth", &[]).is_ok());
    }
}
