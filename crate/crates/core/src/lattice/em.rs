//! Maxwell evolution in temporal gauge on a periodic grid.
//!
//! The state holds `A_r` at integer times and `F_{0r}` at half-integer
//! times. Internally the densitized field `E^k = h^{kj} F_{0j} √h` is
//! evolved, so the discrete Gauss law `Σ_k D_k E^k` changes only by
//! `Σ_{ik} D_k D_i M^{ik}` with `M` antisymmetric, which vanishes exactly.

use super::grid::LatticeGrid;
use rand::Rng;

use super::state::{FieldState, Slot, StateLayout};
use super::LatticeError;

/// Constant spatial metric with its inverse and `√det h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialMetric {
    pub h: [[f64; 3]; 3],
    pub inv: [[f64; 3]; 3],
    pub sqrt_det: f64,
}

impl SpatialMetric {
    pub fn flat() -> Self {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        SpatialMetric {
            h: id,
            inv: id,
            sqrt_det: 1.0,
        }
    }

    pub fn new(h: [[f64; 3]; 3]) -> Result<Self, LatticeError> {
        let m = nalgebra::Matrix3::from_fn(|i, j| h[i][j]);
        let chol = m
            .cholesky()
            .ok_or_else(|| LatticeError::Shape("spatial metric must be positive definite".into()))?;
        let inv = chol.inverse();
        Ok(SpatialMetric {
            h,
            inv: std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])),
            sqrt_det: m.determinant().sqrt(),
        })
    }
}

pub fn a_slot(r: usize) -> Slot {
    Slot::new("A", &[r as u8 + 1])
}

pub fn f0_slot(r: usize) -> Slot {
    Slot::new("F0", &[r as u8 + 1])
}

fn d(grid: &LatticeGrid, f: &[f64], axis: usize) -> Vec<f64> {
    if axis < grid.dim {
        grid.diff(f, axis)
    } else {
        vec![0.0; f.len()]
    }
}

fn fields(state: &FieldState) -> Result<([Vec<f64>; 3], [Vec<f64>; 3]), LatticeError> {
    let get = |s: Slot| {
        state
            .field(&s)
            .map(|x| x.to_vec())
            .ok_or_else(|| LatticeError::Shape(format!("state has no slot {s}")))
    };
    Ok((
        [get(a_slot(0))?, get(a_slot(1))?, get(a_slot(2))?],
        [get(f0_slot(0))?, get(f0_slot(1))?, get(f0_slot(2))?],
    ))
}

fn densitize(g: &SpatialMetric, f0: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    std::array::from_fn(|k| {
        (0..f0[0].len())
            .map(|s| g.sqrt_det * (0..3).map(|j| g.inv[k][j] * f0[j][s]).sum::<f64>())
            .collect()
    })
}

fn lower(g: &SpatialMetric, e: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    std::array::from_fn(|r| {
        (0..e[0].len())
            .map(|s| (0..3).map(|k| g.h[r][k] * e[k][s]).sum::<f64>() / g.sqrt_det)
            .collect()
    })
}

/// Max-norm of the discrete Gauss law `Σ_k D_k E^k`.
pub fn gauss_residual_of(grid: &LatticeGrid, e: &[Vec<f64>; 3]) -> f64 {
    let mut div = vec![0.0; grid.sites()];
    for (k, ek) in e.iter().enumerate() {
        for (x, v) in d(grid, ek, k).into_iter().enumerate() {
            div[x] += v;
        }
    }
    div.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn gauss_residual(state: &FieldState, g: &SpatialMetric) -> Result<f64, LatticeError> {
    let (_, f0) = fields(state)?;
    Ok(gauss_residual_of(&state.grid, &densitize(g, &f0)))
}

/// `Σ_i D_i(h^{ij} h^{kl} F_{jl} √h)` for each `k`.
fn curl_curl(grid: &LatticeGrid, g: &SpatialMetric, a: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    let n = grid.sites();
    let da: Vec<Vec<Vec<f64>>> = (0..3).map(|j| (0..3).map(|l| d(grid, &a[l], j)).collect()).collect();
    let f = |j: usize, l: usize, s: usize| da[j][l][s] - da[l][j][s];
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    for i in 0..3 {
        for k in 0..3 {
            if i == k {
                continue;
            }
            let m: Vec<f64> = (0..n)
                .map(|s| {
                    let mut acc = 0.0;
                    for j in 0..3 {
                        for l in 0..3 {
                            if j != l {
                                acc += g.inv[i][j] * g.inv[k][l] * f(j, l, s);
                            }
                        }
                    }
                    acc * g.sqrt_det
                })
                .collect();
            for (s, v) in d(grid, &m, i).into_iter().enumerate() {
                out[k][s] += v;
            }
        }
    }
    out
}

/// Output of a leapfrog run.
#[derive(Clone, Debug, PartialEq)]
pub struct EmRun {
    /// States recorded every `stride` steps, starting with the initial one.
    pub trajectory: Vec<FieldState>,
    /// Gauss residual after each step, preceded by the initial value.
    pub gauss: Vec<f64>,
}

impl EmRun {
    pub fn last(&self) -> &FieldState {
        self.trajectory.last().expect("initial state is recorded")
    }

    /// Largest change of the Gauss residual relative to its initial value.
    pub fn gauss_drift(&self) -> f64 {
        let g0 = self.gauss[0];
        self.gauss.iter().fold(0.0, |m, g| m.max((g - g0).abs()))
    }
}

pub fn evolve_em(
    state: &FieldState,
    g: &SpatialMetric,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<EmRun, LatticeError> {
    let grid = state.grid;
    if dt > grid.h {
        return Err(LatticeError::Cfl { dt, h: grid.h });
    }
    let (mut a, f0) = fields(state)?;
    let mut e = densitize(g, &f0);
    let mut f0 = f0;
    let mut gauss = vec![gauss_residual_of(&grid, &e)];
    let mut trajectory = vec![state.clone()];
    let stride = stride.max(1);
    for step in 1..=steps {
        for r in 0..3 {
            for (x, v) in a[r].iter_mut().zip(&f0[r]) {
                *x += dt * v;
            }
        }
        let cc = curl_curl(&grid, g, &a);
        for k in 0..3 {
            for (x, v) in e[k].iter_mut().zip(&cc[k]) {
                *x += dt * v;
            }
        }
        f0 = lower(g, &e);
        gauss.push(gauss_residual_of(&grid, &e));
        if step % stride == 0 || step == steps {
            let mut s = state.clone();
            for r in 0..3 {
                s.field_mut(&a_slot(r)).expect("slot checked").copy_from_slice(&a[r]);
                s.field_mut(&f0_slot(r)).expect("slot checked").copy_from_slice(&f0[r]);
            }
            trajectory.push(s);
        }
    }
    Ok(EmRun { trajectory, gauss })
}

/// Leapfrog frequency of a transverse plane wave with wave numbers `kappa`
/// on a flat grid: `4 sin²(Ω dt/2) = dt² Σ sin²(κ_i h)/h²`.
pub fn discrete_frequency(grid: &LatticeGrid, kappa: &[f64], dt: f64) -> f64 {
    let k2: f64 = kappa.iter().map(|k| ((k * grid.h).sin() / grid.h).powi(2)).sum();
    2.0 / dt * (dt * k2.sqrt() / 2.0).asin()
}

/// Fills `state` with `A = a cos(κ·x)` and `F_0 = (A(dt) - A(0))/dt` for the
/// exact discrete plane wave of frequency `discrete_frequency`.
pub fn plane_wave(state: &mut FieldState, kappa: &[f64; 3], amp: &[f64; 3], dt: f64) {
    let grid = state.grid;
    let omega = discrete_frequency(&grid, &kappa[..grid.dim.min(3)], dt);
    for site in 0..grid.sites() {
        let pos = grid.position(site);
        let phase: f64 = pos.iter().zip(kappa).map(|(x, k)| x * k).sum();
        for r in 0..3 {
            let a0 = amp[r] * phase.cos();
            let a1 = amp[r] * (phase - omega * dt).cos();
            state.field_mut(&a_slot(r)).expect("A slot")[site] = a0;
            state.field_mut(&f0_slot(r)).expect("F0 slot")[site] = (a1 - a0) / dt;
        }
    }
}

/// Random `A` and a random `F_0` whose densitized field is the discrete
/// divergence of an antisymmetric array, so the Gauss law holds exactly.
pub fn gauss_free_state<R: Rng>(grid: LatticeGrid, layout: StateLayout, g: &SpatialMetric, rng: &mut R) -> FieldState {
    let n = grid.sites();
    let mut s = FieldState::zeros(grid, layout);
    for r in 0..3 {
        if let Some(a) = s.field_mut(&a_slot(r)) {
            a.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        }
    }
    let w: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|_| (0..3).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
        .collect();
    let e: [Vec<f64>; 3] = std::array::from_fn(|i| {
        let mut acc = vec![0.0; n];
        for j in 0..3 {
            let wij: Vec<f64> = (0..n).map(|x| w[i][j][x] - w[j][i][x]).collect();
            for (x, v) in d(&grid, &wij, j).into_iter().enumerate() {
                acc[x] += v;
            }
        }
        acc
    });
    let f0 = lower(g, &e);
    for r in 0..3 {
        if let Some(f) = s.field_mut(&f0_slot(r)) {
            f.copy_from_slice(&f0[r]);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn layout() -> StateLayout {
        StateLayout::new((0..3).flat_map(|r| [a_slot(r), f0_slot(r)]).collect())
    }

    #[test]
    fn zero_stays_zero() {
        let grid = LatticeGrid::new(3, 4, 0.5).unwrap();
        let s = FieldState::zeros(grid, layout());
        let run = evolve_em(&s, &SpatialMetric::flat(), 0.1, 5, 1).unwrap();
        assert!(run.last().values.iter().all(|x| *x == 0.0));
        assert!(evolve_em(&s, &SpatialMetric::flat(), 0.6, 1, 1).is_err());
    }

    #[test]
    fn gauss_law_is_preserved_on_curved_metric() {
        let grid = LatticeGrid::new(3, 6, 0.4).unwrap();
        let g = SpatialMetric::new([[1.2, 0.1, 0.0], [0.1, 0.9, 0.05], [0.0, 0.05, 1.1]]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s = gauss_free_state(grid, layout(), &g, &mut rng);
        assert!(gauss_residual(&s, &g).unwrap() < 1e-13);
        let run = evolve_em(&s, &g, 0.1, 200, 50).unwrap();
        assert!(run.gauss_drift() < 1e-12, "{}", run.gauss_drift());
    }

    #[test]
    fn plane_wave_follows_discrete_dispersion() {
        let grid = LatticeGrid::new(3, 8, 0.25).unwrap();
        let tau = std::f64::consts::TAU;
        let kappa = [tau / (8.0 * 0.25), 0.0, 0.0];
        let amp = [0.0, 1.0, 0.5];
        let dt = 0.1;
        let mut s = FieldState::zeros(grid, layout());
        plane_wave(&mut s, &kappa, &amp, dt);
        let steps = 200;
        let run = evolve_em(&s, &SpatialMetric::flat(), dt, steps, steps).unwrap();
        let omega = discrete_frequency(&grid, &kappa, dt);
        let last = run.last();
        let mut err: f64 = 0.0;
        for site in 0..grid.sites() {
            let phase = grid.position(site)[0] * kappa[0] - omega * dt * steps as f64;
            for r in 0..3 {
                err = err.max((last.field(&a_slot(r)).unwrap()[site] - amp[r] * phase.cos()).abs());
            }
        }
        assert!(err < 1e-8, "{err}");
    }
}
