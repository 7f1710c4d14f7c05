//! Variation, integration by parts, boundary restriction and constraints.

use std::collections::{BTreeMap, BTreeSet};

use crate::expr::{diff_jet, total_derivative_with, Expr, JetVar, Notation};

use super::form::LocalVarForm;
use super::theory::TheorySpec;
use super::VarError;

/// `Σ ∂L/∂v δv` over every varied jet variable in the Lagrangian.
pub fn variation(t: &TheorySpec) -> LocalVarForm {
    let mut f = LocalVarForm::zero(1);
    for v in t.lagrangian.vars().into_iter().filter(|v| v.is_varied()) {
        f.add_term(vec![v.clone()], diff_jet(&t.lagrangian, &v));
    }
    f
}

/// Which end of the transversal interval a boundary density sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryEnd {
    Upper,
    Lower,
}

impl BoundaryEnd {
    pub fn sign(self) -> i32 {
        match self {
            BoundaryEnd::Upper => 1,
            BoundaryEnd::Lower => -1,
        }
    }
}

/// Result of integrating a variation by parts.
///
/// With `E_A` the entries of `el` the identity
/// `δL = -Σ E_A δφ_A + Σ_i D_i div_i + D_t alpha_bulk` holds exactly.
/// `alpha` is the Noether form restricted to the boundary, oriented as the
/// upper end; the lower end carries `BoundaryEnd::Lower.sign()` times it.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySplit {
    pub el: Vec<(JetVar, Expr)>,
    pub alpha_bulk: LocalVarForm,
    pub alpha: LocalVarForm,
    pub divergences: Vec<(usize, LocalVarForm)>,
}

impl BoundarySplit {
    pub fn el_of(&self, v: &JetVar) -> Option<&Expr> {
        self.el.iter().find(|(u, _)| u == v).map(|(_, e)| e)
    }

    /// The degree-one form `-Σ E_A δφ_A`.
    pub fn el_form(&self) -> LocalVarForm {
        let mut f = LocalVarForm::zero(1);
        for (v, e) in &self.el {
            f.add_term(vec![v.clone()], -e);
        }
        f
    }

    /// Right-hand side of the reconstruction identity.
    pub fn reconstruct(&self, t: &TheorySpec) -> Result<LocalVarForm, VarError> {
        let max = t.max_jet_order() + 1;
        let mut out = self.el_form();
        for (i, div) in &self.divergences {
            out = out.add(&div.total_derivative(*i, max)?);
        }
        Ok(out.add(&self.alpha_bulk.total_derivative(t.transversal, max)?))
    }
}

pub fn ibp_split(v: &LocalVarForm, t: &TheorySpec) -> Result<BoundarySplit, VarError> {
    if v.degree() != 1 {
        return Err(VarError::Malformed(format!(
            "integration by parts needs a degree-1 form, got degree {}",
            v.degree()
        )));
    }
    let max = t.max_jet_order();
    let mut work: BTreeMap<JetVar, Expr> = BTreeMap::new();
    for (g, c) in v.terms() {
        work.insert(g[0].clone(), c.clone());
    }
    let mut alpha = LocalVarForm::zero(1);
    let mut divs: BTreeMap<usize, LocalVarForm> = BTreeMap::new();
    loop {
        let next = work
            .keys()
            .filter(|g| g.order() > 0)
            .max_by_key(|g| g.order())
            .cloned();
        let Some(g) = next else { break };
        let c = work.remove(&g).unwrap();
        // tangential indices come off first, the transversal one last
        let coord = g
            .deriv
            .iter()
            .rev()
            .copied()
            .find(|&d| d as usize != t.transversal)
            .unwrap_or(t.transversal as u8) as usize;
        let lower = g.without_deriv(coord as u8).expect("index present");
        let dc = total_derivative_with(&c, coord, max)?;
        if coord == t.transversal {
            alpha.add_term(vec![lower.clone()], c);
        } else {
            divs.entry(coord)
                .or_insert_with(|| LocalVarForm::zero(1))
                .add_term(vec![lower.clone()], c);
        }
        let slot = work.entry(lower).or_default();
        *slot = &*slot - &dc;
    }
    let mut el = Vec::new();
    let mut seen = BTreeSet::new();
    for phi in t.field_components() {
        let e = work.get(&phi).map(|c| -c).unwrap_or_default();
        seen.insert(phi.clone());
        el.push((phi, e));
    }
    for (g, c) in &work {
        if !seen.contains(g) && !c.is_zero() {
            el.push((g.clone(), -c));
        }
    }
    let restricted = boundary_restrict_form(&alpha, t)?;
    Ok(BoundarySplit {
        el,
        alpha_bulk: alpha,
        alpha: restricted,
        divergences: divs.into_iter().filter(|(_, f)| !f.is_zero()).collect(),
    })
}

/// Name of the boundary symbol standing for `k` transversal derivatives.
pub fn boundary_name(t: &TheorySpec, field: &str, k: usize) -> String {
    format!("{field}_{}", t.coords[t.transversal].repeat(k))
}

fn restrict_var(v: &JetVar, t: &TheorySpec) -> Result<Option<Expr>, VarError> {
    let tr = t.transversal as u8;
    for rule in &t.substitutions {
        if rule.lhs.field != v.field || rule.lhs.component != v.component {
            continue;
        }
        let mut rest = v.clone();
        let mut ok = true;
        for &d in &rule.lhs.deriv {
            match rest.without_deriv(d) {
                Some(r) => rest = r,
                None => ok = false,
            }
        }
        if !ok || rest.deriv.contains(&tr) {
            continue;
        }
        let mut e = rule.rhs.clone();
        for &d in &rest.deriv {
            e = total_derivative_with(&e, d as usize, t.max_jet_order() + 1)?;
        }
        return Ok(Some(e));
    }
    let k = v.count_deriv(tr);
    if k == 0 {
        return Ok(None);
    }
    let mut renamed = v.clone();
    renamed.field = boundary_name(t, &v.field, k);
    renamed.deriv.retain(|&d| d != tr);
    Ok(Some(Expr::var(renamed)))
}

/// Replaces transversal jets by independent boundary symbols, applying the
/// declared substitution rules first.
pub fn boundary_restrict(e: &Expr, t: &TheorySpec) -> Result<Expr, VarError> {
    let mut cache: BTreeMap<JetVar, Option<Expr>> = BTreeMap::new();
    for v in e.vars() {
        let r = restrict_var(&v, t)?;
        cache.insert(v, r);
    }
    if cache.values().all(|r| r.is_none()) {
        return Ok(e.clone());
    }
    Ok(e.substitute(&mut |v| cache.get(v).cloned().flatten())?)
}

/// Pulls a form back to the boundary: coefficients are restricted and each
/// generator `δv` becomes `δ(restrict(v))`.
pub fn boundary_restrict_form(f: &LocalVarForm, t: &TheorySpec) -> Result<LocalVarForm, VarError> {
    let mut out = LocalVarForm::zero(f.degree());
    for (gens, c) in f.terms() {
        let mut acc = LocalVarForm::scalar(boundary_restrict(c, t)?);
        for g in gens {
            let one_form = match restrict_var(g, t)? {
                None => {
                    let mut d = LocalVarForm::zero(1);
                    d.add_term(vec![g.clone()], Expr::one());
                    d
                }
                Some(r) => {
                    let mut d = LocalVarForm::zero(1);
                    for u in r.vars().into_iter().filter(|u| u.is_varied()) {
                        d.add_term(vec![u.clone()], diff_jet(&r, &u));
                    }
                    d
                }
            };
            acc = acc.wedge(&one_form);
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// A Cauchy constraint: an Euler-Lagrange density that involves only
/// boundary data.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Restricted density scaled to leading coefficient one.
    pub density: Expr,
    /// Restricted density with the Euler-Lagrange normalization.
    pub raw: Expr,
}

/// Euler-Lagrange densities whose boundary restriction only involves
/// phase-space symbols (those occurring in the restricted Noether form),
/// declared boundary fields and backgrounds.
pub fn constraint_extract(t: &TheorySpec, split: &BoundarySplit) -> Result<Vec<Constraint>, VarError> {
    let mut allowed: BTreeSet<(String, Vec<u8>)> = BTreeSet::new();
    for (gens, c) in split.alpha.terms() {
        for v in gens.iter().cloned().chain(c.vars()) {
            allowed.insert((v.field.clone(), v.component.clone()));
        }
    }
    let boundary_fields: BTreeSet<&str> = t
        .fields
        .iter()
        .filter(|f| f.boundary)
        .map(|f| f.name.as_str())
        .collect();
    let notation = Notation::with_transversal(t.transversal);
    let mut out = Vec::new();
    for (phi, e) in &split.el {
        if e.is_zero() {
            continue;
        }
        let r = boundary_restrict(e, t)?;
        let ok = r.vars().iter().all(|v| {
            !v.is_varied()
                || boundary_fields.contains(v.field.as_str())
                || allowed.contains(&(v.field.clone(), v.component.clone()))
        });
        if ok && !r.is_zero() {
            out.push(Constraint {
                name: phi.render(notation.transversal),
                density: r.monic(),
                raw: r,
            });
        }
    }
    Ok(out)
}
