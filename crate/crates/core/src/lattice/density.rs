//! Local densities evaluated on a lattice, with exact gradients of their
//! smeared sums.

use std::collections::BTreeMap;

use crate::calc_var::TheorySpec;
use crate::expr::{diff_jet, evaluate_f64, Expr, JetVar};

use super::state::{Environment, FieldState, Slot};
use super::LatticeError;

#[derive(Clone, Debug, PartialEq)]
enum Role {
    /// Field slot differentiated along the listed grid axes.
    Slot { slot: usize, axes: Vec<usize> },
    Value(f64),
}

/// A density whose symbols are bound to state slots, stencils and
/// background values.
#[derive(Clone, Debug)]
pub struct CompiledDensity {
    expr: Expr,
    vars: BTreeMap<JetVar, Role>,
    partials: Vec<(JetVar, Expr)>,
}

impl CompiledDensity {
    pub fn new(expr: &Expr, t: &TheorySpec, state: &FieldState, env: &Environment) -> Result<Self, LatticeError> {
        let tang = t.tangential();
        let mut vars = BTreeMap::new();
        for v in expr.vars() {
            let mut axes = Vec::new();
            let mut vanishes = false;
            for &d in &v.deriv {
                match tang.iter().position(|&c| c == d as usize) {
                    Some(a) if a < state.grid.dim => axes.push(a),
                    Some(_) => vanishes = true,
                    None => {
                        return Err(LatticeError::Shape(format!(
                            "transversal derivative in boundary density: {v}"
                        )))
                    }
                }
            }
            let role = if !v.is_varied() {
                if v.deriv.is_empty() {
                    Role::Value(env.background(&v.field, &v.component))
                } else {
                    Role::Value(0.0)
                }
            } else if vanishes {
                Role::Value(0.0)
            } else {
                let slot = state
                    .layout
                    .index(&Slot::of(&v))
                    .ok_or_else(|| LatticeError::Shape(format!("no state slot for `{v}`")))?;
                Role::Slot { slot, axes }
            };
            vars.insert(v, role);
        }
        let partials = vars
            .iter()
            .filter(|(_, r)| matches!(r, Role::Slot { .. }))
            .map(|(v, _)| (v.clone(), diff_jet(expr, v)))
            .filter(|(_, d)| !d.is_zero())
            .collect();
        Ok(CompiledDensity {
            expr: expr.clone(),
            vars,
            partials,
        })
    }

    fn arrays(&self, state: &FieldState) -> BTreeMap<JetVar, Vec<f64>> {
        let mut out = BTreeMap::new();
        for (v, r) in &self.vars {
            if let Role::Slot { slot, axes } = r {
                out.insert(v.clone(), state.grid.diff_many(state.slot_values(*slot), axes));
            }
        }
        out
    }

    fn eval_sites(
        &self,
        e: &Expr,
        arrays: &BTreeMap<JetVar, Vec<f64>>,
        state: &FieldState,
        env: &Environment,
    ) -> Result<Vec<f64>, LatticeError> {
        let funcs = |name: &str, order: u32, x: f64| env.call(name, order, x);
        (0..state.grid.sites())
            .map(|site| {
                let lookup = |v: &JetVar| match self.vars.get(v)? {
                    Role::Value(x) => Some(*x),
                    Role::Slot { .. } => arrays.get(v).map(|a| a[site]),
                };
                evaluate_f64(e, &lookup, &funcs).map_err(LatticeError::from)
            })
            .collect()
    }

    /// Density value at every site.
    pub fn values(&self, state: &FieldState, env: &Environment) -> Result<Vec<f64>, LatticeError> {
        let arrays = self.arrays(state);
        self.eval_sites(&self.expr, &arrays, state, env)
    }

    /// `Σ_x w λ(x) f(x)` with `λ = 1` when no smearing is given.
    pub fn integrate(&self, state: &FieldState, env: &Environment, smear: Option<&[f64]>) -> Result<f64, LatticeError> {
        let w = state.grid.weight();
        let vals = self.values(state, env)?;
        Ok(vals
            .iter()
            .enumerate()
            .map(|(s, f)| w * smear.map_or(1.0, |l| l[s]) * f)
            .sum())
    }

    /// Exact derivative of `integrate` with respect to every state entry.
    pub fn gradient(&self, state: &FieldState, env: &Environment, smear: Option<&[f64]>) -> Result<Vec<f64>, LatticeError> {
        let w = state.grid.weight();
        let sites = state.grid.sites();
        let arrays = self.arrays(state);
        let mut grad = vec![0.0; state.dim()];
        for (v, d) in &self.partials {
            let Some(Role::Slot { slot, axes }) = self.vars.get(v) else { continue };
            let vals = self.eval_sites(d, &arrays, state, env)?;
            let g: Vec<f64> = vals
                .iter()
                .enumerate()
                .map(|(s, x)| w * smear.map_or(1.0, |l| l[s]) * x)
                .collect();
            // centered differences are antisymmetric, so the adjoint of D^k is (-1)^k D^k
            let mut adj = state.grid.diff_many(&g, axes);
            if axes.len() % 2 == 1 {
                adj.iter_mut().for_each(|x| *x = -*x);
            }
            for (s, x) in adj.into_iter().enumerate() {
                grad[slot * sites + s] += x;
            }
        }
        Ok(grad)
    }

    /// Sparse Jacobian of the site values: `(site, flat state index, value)`.
    pub fn jacobian(&self, state: &FieldState, env: &Environment) -> Result<Vec<(usize, usize, f64)>, LatticeError> {
        let arrays = self.arrays(state);
        let sites = state.grid.sites();
        let mut out = Vec::new();
        for (v, d) in &self.partials {
            let Some(Role::Slot { slot, axes }) = self.vars.get(v) else { continue };
            let vals = self.eval_sites(d, &arrays, state, env)?;
            let stencil = state.grid.stencil(axes);
            for (x, val) in vals.iter().enumerate() {
                if *val == 0.0 {
                    continue;
                }
                for (off, wgt) in &stencil {
                    let y = state.grid.shift(x, off);
                    out.push((x, slot * sites + y, val * wgt));
                }
            }
        }
        Ok(out)
    }
}
