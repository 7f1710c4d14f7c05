//! Seeded numeric checks for each shipped theory.

use rand::Rng;
use serde::Serialize;

use crate::expr::{Expr, JetVar};
use crate::theories;

use super::em::{a_slot, evolve_em, f0_slot, gauss_free_state, SpatialMetric};
use super::pc::{random_generator, PcSite};
use super::point::{constrained_two_form, cosine};
use super::scalar::{convergence_orders, momentum_slot, phi_slot, symplectic_current_check};
use super::twoform::{hamiltonian_vector_field, poisson_bracket, two_form_rank, RANK_TOLERANCE};
use super::{Environment, FieldState, Functional, LatticeError, LatticeGrid, LatticeModel, Slot};

fn builtin(name: &str) -> Result<crate::calc_var::TheorySpec, LatticeError> {
    theories::builtin(name).map_err(|e| LatticeError::Shape(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MechanicsCheck {
    pub points: usize,
    /// Largest deviation of `X_H` from `(v, -V'(q)/m)`.
    pub max_error: f64,
    pub max_residual: f64,
}

/// `H = ½ m v² + V(q)` with `V(q) = q⁴/4 + q²/2` at random `(q, v, m)`.
pub fn mechanics_check<R: Rng>(rng: &mut R, points: usize) -> Result<MechanicsCheck, LatticeError> {
    let t = builtin("mechanics")?;
    let q = Expr::var(JetVar::field("q", &[]));
    let v = Expr::var(JetVar::field("q_t", &[]));
    let m = Expr::var(JetVar::constant("m"));
    let h = &(&(&(&Expr::ratio(1, 2) * &m) * &v) * &v) + &Expr::apply("V", 0, q);
    let dv = |x: f64| x.powi(3) + x;
    let mut out = MechanicsCheck {
        points,
        max_error: 0.0,
        max_residual: 0.0,
    };
    for _ in 0..points {
        let mass: f64 = rng.gen_range(0.5..3.0);
        let mut env = Environment::flat(&t);
        env.set_background("m", &[], mass);
        env.set_function("V", move |k, x| match k {
            0 => Some(x.powi(4) / 4.0 + x * x / 2.0),
            1 => Some(dv(x)),
            2 => Some(3.0 * x * x + 1.0),
            _ => None,
        });
        let model = LatticeModel::new(t.clone(), env)?;
        let mut s = model.zero_state(LatticeGrid::point());
        let (qv, vv) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (iq, iv) = (index(&s, "q")?, index(&s, "q_t")?);
        s.values[iq] = qv;
        s.values[iv] = vv;
        let form = model.two_form(&s)?;
        let df = model.functional_gradient(&Functional::new("H", h.clone()), &s)?;
        let x = hamiltonian_vector_field(&form, &df);
        out.max_error = out
            .max_error
            .max((x.x[iq] - vv).abs())
            .max((x.x[iv] + dv(qv) / mass).abs());
        out.max_residual = out.max_residual.max(x.residual);
    }
    Ok(out)
}

fn index(s: &FieldState, field: &str) -> Result<usize, LatticeError> {
    s.layout
        .index(&Slot::new(field, &[]))
        .ok_or_else(|| LatticeError::Shape(format!("no slot {field}")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthCheck {
    pub points: usize,
    pub min_rank: usize,
    pub max_rank: usize,
    /// Smallest ratio between the fourth and fifth singular values.
    pub min_gap: f64,
    /// Smallest cosine between the kernel and `(X_q = u, X_u = 0)`.
    pub min_cosine: f64,
}

/// The length functional in three dimensions on `{|u| = 1}`.
pub fn length_check<R: Rng>(rng: &mut R, points: usize) -> Result<LengthCheck, LatticeError> {
    let t = builtin("length")?;
    let model = LatticeModel::new(t.clone(), Environment::flat(&t))?;
    let mut out = LengthCheck {
        points,
        min_rank: usize::MAX,
        max_rank: 0,
        min_gap: f64::INFINITY,
        min_cosine: 1.0,
    };
    for _ in 0..points {
        let mut s = model.zero_state(LatticeGrid::point());
        let u: Vec<f64> = loop {
            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.1 {
                break u.iter().map(|x| x / n).collect();
            }
        };
        let mut grad = vec![0.0; s.dim()];
        let mut expected = vec![0.0; s.dim()];
        for a in 0..3 {
            let iq = s.layout.index(&Slot::new("q", &[a as u8])).ok_or_else(|| LatticeError::Shape("no q".into()))?;
            let iu = s.layout.index(&Slot::new("q_t", &[a as u8])).ok_or_else(|| LatticeError::Shape("no q_t".into()))?;
            s.values[iq] = rng.gen_range(-1.0..1.0);
            s.values[iu] = u[a];
            grad[iu] = 2.0 * u[a];
            expected[iq] = u[a];
        }
        let form = model.two_form(&s)?;
        let c = constrained_two_form(&form, &[grad], RANK_TOLERANCE);
        out.min_rank = out.min_rank.min(c.rank);
        out.max_rank = out.max_rank.max(c.rank);
        if c.singular.len() >= 5 {
            out.min_gap = out.min_gap.min(c.singular[3] / c.singular[4].max(f64::MIN_POSITIVE));
        }
        let cos = c.kernel.first().map_or(0.0, |k| cosine(k, &expected));
        out.min_cosine = out.min_cosine.min(cos);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarCheck {
    pub sites: usize,
    pub rank: usize,
    /// `2 · sites - rank`.
    pub rank_deficit: usize,
    /// Order observed at the last halving.
    pub order: f64,
    pub dts: Vec<f64>,
    pub differences: Vec<f64>,
    pub orders: Vec<f64>,
}

fn smooth_field<R: Rng>(rng: &mut R, grid: &LatticeGrid) -> Vec<f64> {
    let modes: Vec<(f64, f64)> = (1..=3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3))).collect();
    let len = grid.n as f64 * grid.h;
    (0..grid.sites())
        .map(|s| {
            let x = grid.position(s)[0];
            modes
                .iter()
                .enumerate()
                .map(|(k, (a, p))| a * (std::f64::consts::TAU * (k + 1) as f64 * x / len + p).cos())
                .sum()
        })
        .collect()
}

/// Free scalar field on a periodic line of `sites` sites: rank of `ω` and
/// the drift of `ω(X, Y)` between `t = 0` and `t = 1` for two solutions as
/// the step is halved from `0.02`.
pub fn scalar_check<R: Rng>(rng: &mut R, sites: usize, halvings: usize) -> Result<ScalarCheck, LatticeError> {
    let t = builtin("scalar")?;
    let env = Environment::flat(&t);
    let inverse = t
        .metric_split
        .as_ref()
        .map(|m| m.inverse_name())
        .ok_or_else(|| LatticeError::Shape("scalar theory has no metric split".into()))?;
    let model = LatticeModel::new(t, env.clone())?;
    let grid = LatticeGrid::new(1, sites, 1.0 / sites as f64)?;
    let form = model.two_form(&model.zero_state(grid))?;
    let rank = two_form_rank(&form, RANK_TOLERANCE);
    let mut pair = Vec::new();
    for _ in 0..2 {
        let mut s = model.zero_state(grid);
        let phi = smooth_field(rng, &grid);
        let pi = smooth_field(rng, &grid);
        s.field_mut(&phi_slot()).ok_or_else(|| LatticeError::Shape("no phi".into()))?.copy_from_slice(&phi);
        s.field_mut(&momentum_slot()).ok_or_else(|| LatticeError::Shape("no phi_t".into()))?.copy_from_slice(&pi);
        pair.push(s);
    }
    let dts: Vec<f64> = (0..=halvings).map(|k| 0.02 / f64::powi(2.0, k as i32)).collect();
    let differences = dts
        .iter()
        .map(|&dt| symplectic_current_check(&form, &env, &inverse, &pair[0], &pair[1], 0.0, 1.0, dt))
        .collect::<Result<Vec<_>, _>>()?;
    let orders = convergence_orders(&differences);
    Ok(ScalarCheck {
        sites,
        rank,
        rank_deficit: form.dim() - rank,
        order: orders.last().copied().unwrap_or(f64::NAN),
        orders,
        dts,
        differences,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmCheck {
    pub n: usize,
    /// Largest deviation of the `A` component of `X_λ` from `D_i λ`.
    pub gauge_a_error: f64,
    /// Largest `F_0` component of `X_λ`.
    pub gauge_f0: f64,
    pub gauge_residual: f64,
    pub pairs: usize,
    pub max_bracket: f64,
    /// `ω(X, Y)` for a Gauss-compatible `X` and a gauge direction `Y`.
    pub gauge_null_pairing: f64,
    pub steps: usize,
    pub gauss_drift: f64,
}

fn random_sites<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Maxwell theory on a flat periodic `n³` grid with spacing `0.25`.
pub fn em_check<R: Rng>(rng: &mut R, n: usize, pairs: usize, steps: usize) -> Result<EmCheck, LatticeError> {
    let t = builtin("em")?;
    let model = LatticeModel::new(t.clone(), Environment::flat(&t))?;
    let gauss = model
        .constraint("A[0]")
        .ok_or_else(|| LatticeError::Shape("em has no Gauss constraint".into()))?
        .raw
        .clone();
    let grid = LatticeGrid::new(3, n, 0.25)?;
    let g = SpatialMetric::flat();
    let state = gauss_free_state(grid, model.layout.clone(), &g, rng);
    let form = model.two_form(&state)?;
    let sites = grid.sites();
    let j = |lambda: Vec<f64>| Functional::new("J", gauss.clone()).smeared(lambda);

    let lambda = random_sites(rng, sites);
    let x = hamiltonian_vector_field(&form, &model.functional_gradient(&j(lambda.clone()), &state)?);
    let slot = |s: Slot| state.layout.index(&s).ok_or_else(|| LatticeError::Shape(format!("no slot {s}")));
    let mut gauge_a_error = 0.0f64;
    let mut gauge_f0 = 0.0f64;
    let mut y = vec![0.0; state.dim()];
    for r in 0..3 {
        let (ia, i0) = (slot(a_slot(r))?, slot(f0_slot(r))?);
        let dl = grid.diff(&lambda, r);
        for site in 0..sites {
            gauge_a_error = gauge_a_error.max((x.x[ia * sites + site] - dl[site]).abs());
            gauge_f0 = gauge_f0.max(x.x[i0 * sites + site].abs());
            y[ia * sites + site] = dl[site];
        }
    }

    let mut max_bracket = 0.0f64;
    for _ in 0..pairs {
        let dl = model.functional_gradient(&j(random_sites(rng, sites)), &state)?;
        let dm = model.functional_gradient(&j(random_sites(rng, sites)), &state)?;
        max_bracket = max_bracket.max(poisson_bracket(&form, &dl, &dm, 1e-8)?.abs());
    }

    let tangent = gauss_free_state(grid, model.layout.clone(), &g, rng);
    let gauge_null_pairing = form.pair(&tangent.values, &y).abs();

    let run = evolve_em(&state, &g, 0.1, steps, steps.max(1))?;
    Ok(EmCheck {
        n,
        gauge_a_error,
        gauge_f0,
        gauge_residual: x.residual,
        pairs,
        max_bracket,
        gauge_null_pairing,
        steps,
        gauss_drift: run.gauss_drift(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcCheck {
    pub states: usize,
    pub hubble: f64,
    pub kernel_dims: Vec<usize>,
    pub min_kernel_dim: usize,
    pub max_kernel_dim: usize,
    /// Largest deviation of the coframe part of `X_c` from `c·e`.
    pub max_e_error: f64,
    pub max_residual: f64,
    pub max_bracket: f64,
    pub max_threshold: f64,
    pub max_violation: f64,
    pub coisotropic: bool,
}

/// Homogeneous tetrad gravity at `states` random on-surface states with
/// `pairs` sampled `(c, c', μ)` each.
pub fn pc_check<R: Rng>(rng: &mut R, states: usize, pairs: usize, tol: f64) -> Result<PcCheck, LatticeError> {
    let site = PcSite::new(-3.0)?;
    let mut out = PcCheck {
        states,
        hubble: site.hubble()?,
        kernel_dims: Vec::new(),
        min_kernel_dim: usize::MAX,
        max_kernel_dim: 0,
        max_e_error: 0.0,
        max_residual: 0.0,
        max_bracket: 0.0,
        max_threshold: 0.0,
        max_violation: 0.0,
        coisotropic: true,
    };
    for _ in 0..states {
        let f = site.sample_on_surface(rng)?;
        let form = site.two_form(&f)?;
        let k = form.dim() - two_form_rank(&form, RANK_TOLERANCE);
        out.kernel_dims.push(k);
        out.min_kernel_dim = out.min_kernel_dim.min(k);
        out.max_kernel_dim = out.max_kernel_dim.max(k);
        let c = random_generator(rng, 1.0);
        let check = site.gauge_field_check(&f, &c)?;
        out.max_e_error = out.max_e_error.max(check.e_error);
        out.max_residual = out.max_residual.max(check.residual);
        for _ in 0..pairs {
            let c2 = random_generator(rng, 1.0);
            let mu: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let r = site.coisotropy(&f, &random_generator(rng, 1.0), &c2, &mu, tol, 1e-6)?;
            out.max_bracket = out.max_bracket.max(r.max_bracket);
            out.max_threshold = out.max_threshold.max(r.threshold);
            out.max_violation = out.max_violation.max(r.violation);
            out.coisotropic &= r.passed;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericCheck {
    pub sites: usize,
    pub dim: usize,
    pub rank: usize,
    pub antisymmetric: bool,
}

/// Rank of the assembled two-form at a random state of any theory with
/// flat backgrounds.
pub fn generic_check<R: Rng>(
    rng: &mut R,
    t: &crate::calc_var::TheorySpec,
    grid: LatticeGrid,
) -> Result<GenericCheck, LatticeError> {
    let model = LatticeModel::new(t.clone(), Environment::flat(t))?;
    let mut s = model.zero_state(grid);
    s.values.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    let form = model.two_form(&s)?;
    Ok(GenericCheck {
        sites: grid.sites(),
        dim: form.dim(),
        rank: two_form_rank(&form, RANK_TOLERANCE),
        antisymmetric: form.matrix.is_antisymmetric(),
    })
}
