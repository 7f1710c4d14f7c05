//! Linear wave evolution of the free scalar field and the conservation of
//! the symplectic current between two times.

use super::state::{Environment, FieldState, Slot};
use super::twoform::TwoFormMatrix;
use super::LatticeError;

pub fn phi_slot() -> Slot {
    Slot::new("phi", &[])
}

pub fn momentum_slot() -> Slot {
    Slot::new("phi_t", &[])
}

/// Time derivative of `(φ, φ_t)` for `φ_tt = Σ_ij h^{ij} D_i D_j φ` on the
/// grid axes, with constant backgrounds taken from `env`.
pub fn wave_rhs(state: &FieldState, env: &Environment, inverse: &str) -> Result<FieldState, LatticeError> {
    let grid = state.grid;
    let phi = state
        .field(&phi_slot())
        .ok_or_else(|| LatticeError::Shape("state has no phi slot".into()))?;
    let pi = state
        .field(&momentum_slot())
        .ok_or_else(|| LatticeError::Shape("state has no phi_t slot".into()))?;
    let mut acc = vec![0.0; grid.sites()];
    for i in 0..grid.dim {
        let di = grid.diff(phi, i);
        for j in 0..grid.dim {
            let (a, b) = (i.min(j) as u8 + 1, i.max(j) as u8 + 1);
            let hij = env.background(inverse, &[a, b]);
            for (x, v) in grid.diff(&di, j).into_iter().enumerate() {
                acc[x] += hij * v;
            }
        }
    }
    let mut out = FieldState::zeros(grid, state.layout.clone());
    out.field_mut(&phi_slot()).expect("checked").copy_from_slice(pi);
    out.field_mut(&momentum_slot()).expect("checked").copy_from_slice(&acc);
    Ok(out)
}

fn axpy(a: f64, x: &FieldState, y: &FieldState) -> FieldState {
    let mut out = y.clone();
    for (o, v) in out.values.iter_mut().zip(&x.values) {
        *o += a * v;
    }
    out
}

/// One step of Heun's second-order method.
pub fn heun_step(state: &FieldState, env: &Environment, inverse: &str, dt: f64) -> Result<FieldState, LatticeError> {
    let k1 = wave_rhs(state, env, inverse)?;
    let mid = axpy(dt, &k1, state);
    let k2 = wave_rhs(&mid, env, inverse)?;
    Ok(axpy(dt / 2.0, &k2, &axpy(dt / 2.0, &k1, state)))
}

pub fn evolve_scalar(
    state: &FieldState,
    env: &Environment,
    inverse: &str,
    dt: f64,
    steps: usize,
) -> Result<FieldState, LatticeError> {
    let mut s = state.clone();
    for _ in 0..steps {
        s = heun_step(&s, env, inverse, dt)?;
    }
    Ok(s)
}

/// `|ω(X_a, Y_a) - ω(X_b, Y_b)|` for two solutions of the linear wave
/// equation started at time `a` and evolved to time `b` with step `dt`.
/// The theory is linear, so its solutions are their own linearizations
/// and `ω` does not depend on the base point.
#[allow(clippy::too_many_arguments)]
pub fn symplectic_current_check(
    m: &TwoFormMatrix,
    env: &Environment,
    inverse: &str,
    x: &FieldState,
    y: &FieldState,
    a: f64,
    b: f64,
    dt: f64,
) -> Result<f64, LatticeError> {
    let steps = ((b - a) / dt).round() as usize;
    let before = m.pair(&x.values, &y.values);
    let xb = evolve_scalar(x, env, inverse, dt, steps)?;
    let yb = evolve_scalar(y, env, inverse, dt, steps)?;
    Ok((before - m.pair(&xb.values, &yb.values)).abs())
}

/// Observed convergence orders `log2(e(dt) / e(dt/2))` over successive
/// halvings.
pub fn convergence_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
