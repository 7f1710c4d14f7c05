//! Local forms of vertical degree 0, 1 and 2 on the jet space.

use std::collections::BTreeMap;

use crate::expr::{
    diff_jet, render, render_latex, total_derivative_with, Expr, ExprError, JetVar, Notation,
};

use super::VarError;

/// Sum of `coefficient * δv_1 ∧ ... ∧ δv_p` with generators stored in
/// increasing order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalVarForm {
    degree: usize,
    terms: BTreeMap<Vec<JetVar>, Expr>,
}

/// Sorts generators, returning the permutation sign, or `None` when a
/// generator repeats.
fn sort_generators(mut gens: Vec<JetVar>) -> Option<(Vec<JetVar>, bool)> {
    let mut odd = false;
    for i in 1..gens.len() {
        let mut j = i;
        while j > 0 && gens[j - 1] > gens[j] {
            gens.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    if gens.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((gens, odd))
}

impl LocalVarForm {
    pub fn zero(degree: usize) -> Self {
        LocalVarForm {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(e: Expr) -> Self {
        let mut f = LocalVarForm::zero(0);
        f.add_term(Vec::new(), e);
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<JetVar>, &Expr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, gens: &[JetVar]) -> Expr {
        self.terms.get(gens).cloned().unwrap_or_default()
    }

    /// Adds `coef * δgens[0] ∧ ...`, reordering with sign.
    pub fn add_term(&mut self, gens: Vec<JetVar>, coef: Expr) {
        assert_eq!(gens.len(), self.degree, "generator count must match the degree");
        if coef.is_zero() {
            return;
        }
        let Some((gens, odd)) = sort_generators(gens) else {
            return;
        };
        let coef = if odd { -coef } else { coef };
        let slot = self.terms.entry(gens).or_default();
        *slot = &*slot + &coef;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &LocalVarForm) -> LocalVarForm {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> LocalVarForm {
        LocalVarForm {
            degree: self.degree,
            terms: self.terms.iter().map(|(g, c)| (g.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &LocalVarForm) -> LocalVarForm {
        self.add(&other.neg())
    }

    pub fn wedge(&self, other: &LocalVarForm) -> LocalVarForm {
        let mut out = LocalVarForm::zero(self.degree + other.degree);
        for (ga, ca) in &self.terms {
            for (gb, cb) in &other.terms {
                let mut g = ga.clone();
                g.extend(gb.iter().cloned());
                out.add_term(g, ca * cb);
            }
        }
        out
    }

    pub fn try_map_coefficients<F>(&self, mut f: F) -> Result<LocalVarForm, ExprError>
    where
        F: FnMut(&Expr) -> Result<Expr, ExprError>,
    {
        let mut out = LocalVarForm::zero(self.degree);
        for (g, c) in &self.terms {
            out.add_term(g.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Total derivative of both coefficients and generators.
    pub fn total_derivative(&self, coord: usize, max_order: usize) -> Result<LocalVarForm, ExprError> {
        let mut out = LocalVarForm::zero(self.degree);
        for (gens, c) in &self.terms {
            out.add_term(gens.clone(), total_derivative_with(c, coord, max_order)?);
            for k in 0..gens.len() {
                let mut g = gens.clone();
                g[k] = g[k].with_deriv(coord as u8);
                if g[k].order() > max_order {
                    return Err(ExprError::OrderLimit {
                        order: g[k].order(),
                        max: max_order,
                    });
                }
                out.add_term(g, c.clone());
            }
        }
        Ok(out)
    }

    /// Text form such as `m*q' δq`.
    pub fn render(&self, n: &Notation) -> String {
        self.render_with(n, false)
    }

    pub fn render_latex(&self, n: &Notation) -> String {
        self.render_with(n, true)
    }

    fn render_with(&self, n: &Notation, latex: bool) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (gens, c)) in self.terms.iter().enumerate() {
            let neg = c.len() == 1 && c.leading_coefficient().is_some_and(|k| k < &num::zero());
            let c = if neg { -c } else { c.clone() };
            let coef = if latex { render_latex(&c, n) } else { render(&c, n) };
            let coef = if c.len() > 1 { format!("({coef})") } else { coef };
            out.push_str(match (idx, neg) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            });
            let mut s = if coef == "1" { String::new() } else { coef };
            for (i, g) in gens.iter().enumerate() {
                if latex {
                    let sep = match (i, s.is_empty()) {
                        (0, true) => "",
                        (0, false) => "\\,",
                        _ => "\\wedge ",
                    };
                    s.push_str(&format!("{sep}\\delta {}", crate::expr::latex_var(g, n)));
                } else {
                    let sep = match (i, s.is_empty()) {
                        (0, true) => "",
                        (0, false) => " ",
                        _ => "^",
                    };
                    s.push_str(&format!("{sep}δ{}", g.render(n.transversal)));
                }
            }
            out.push_str(&s);
        }
        out
    }
}

/// Vertical exterior derivative; raises the degree by one.
pub fn vertical_delta(v: &LocalVarForm) -> Result<LocalVarForm, VarError> {
    if v.degree >= 2 {
        return Err(VarError::DegreeOverflow(v.degree));
    }
    let mut out = LocalVarForm::zero(v.degree + 1);
    for (gens, c) in &v.terms {
        for u in c.vars().into_iter().filter(|u| u.is_varied()) {
            let d = diff_jet(c, &u);
            let mut g = vec![u];
            g.extend(gens.iter().cloned());
            out.add_term(g, d);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(d: &[u8]) -> JetVar {
        JetVar::field("q", &[]).with_derivs(d)
    }

    #[test]
    fn antisymmetry_is_normal_form() {
        let mut f = LocalVarForm::zero(2);
        f.add_term(vec![q(&[0]), q(&[])], Expr::one());
        f.add_term(vec![q(&[]), q(&[0])], Expr::one());
        assert!(f.is_zero());
        f.add_term(vec![q(&[]), q(&[])], Expr::one());
        assert!(f.is_zero());
    }

    #[test]
    fn delta_of_noether_form() {
        let m = Expr::var(JetVar::constant("m"));
        let v = JetVar::field("v", &[]);
        let mut a = LocalVarForm::zero(1);
        a.add_term(vec![q(&[])], m.clone() * Expr::var(v.clone()));
        let w = vertical_delta(&a).unwrap();
        assert_eq!(w.coefficient(&[q(&[]), v.clone()]), -m.clone());
        assert!(vertical_delta(&vertical_delta(&a).unwrap()).is_err());
        let mut expected = LocalVarForm::zero(2);
        expected.add_term(vec![v, q(&[])], m);
        assert_eq!(w, expected);
    }

    #[test]
    fn delta_squared_vanishes() {
        let e = crate::expr::parse_expr("sqrt(x*x + y*y)*y + x^3*z", &crate::expr::AnySymbol)
            .unwrap()
            .normalize()
            .unwrap();
        let f = LocalVarForm::scalar(e);
        let d1 = vertical_delta(&f).unwrap();
        assert!(vertical_delta(&d1).unwrap().is_zero());
    }
}
