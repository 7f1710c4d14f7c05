//! Tetrad gravity on a single site.
//!
//! Fields are taken homogeneous, so every tangential derivative drops out
//! of the boundary densities and the state is the 30 numbers `e[a,i]`,
//! `w[c,d,i]` with `c < d`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::theories;

use super::grid::LatticeGrid;
use super::state::{Environment, FieldState, Slot};
use super::twoform::{hamiltonian_vector_field, TwoFormMatrix};
use super::{coisotropy_check, CoisotropyReport, LatticeError, LatticeModel};

const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// Sign relating the smeared `w[c,d,0]` constraint to the generator of
/// `e ↦ c·e`. A gauge shift of the time component of the connection by
/// `+∂₀c` acts on the coframe as `-c·e`.
pub const GAUGE_SIGN: f64 = -1.0;

/// Antisymmetric internal matrix `c^{ab}`.
pub type Generator = [[f64; 4]; 4];

/// Coframe `e[a][i]` on the three spatial directions and connection
/// `w[c][d][i]`, antisymmetric in `c, d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PcFields {
    pub e: [[f64; 3]; 4],
    pub w: [[[f64; 3]; 4]; 4],
}

impl PcFields {
    /// `e^a_i = δ^a_i` and `w^{0a}_i = hubble δ^a_i`.
    pub fn de_sitter(hubble: f64) -> Self {
        let mut f = PcFields {
            e: [[0.0; 3]; 4],
            w: [[[0.0; 3]; 4]; 4],
        };
        for i in 0..3 {
            f.e[i + 1][i] = 1.0;
            f.w[0][i + 1][i] = hubble;
            f.w[i + 1][0][i] = -hubble;
        }
        f
    }

    /// Acts with a Lorentz matrix on internal indices.
    pub fn lorentz(&self, l: &DMatrix<f64>) -> Self {
        let mut out = self.clone();
        for i in 0..3 {
            for a in 0..4 {
                out.e[a][i] = (0..4).map(|b| l[(a, b)] * self.e[b][i]).sum();
                for b in 0..4 {
                    let mut s = 0.0;
                    for c in 0..4 {
                        for d in 0..4 {
                            s += l[(a, c)] * l[(b, d)] * self.w[c][d][i];
                        }
                    }
                    out.w[a][b][i] = s;
                }
            }
        }
        out
    }

    /// Changes the spatial basis: `e^a_i ↦ e^a_j m^j_i`.
    pub fn change_basis(&self, m: &DMatrix<f64>) -> Self {
        let mut out = self.clone();
        for i in 0..3 {
            for a in 0..4 {
                out.e[a][i] = (0..3).map(|j| self.e[a][j] * m[(j, i)]).sum();
                for b in 0..4 {
                    out.w[a][b][i] = (0..3).map(|j| self.w[a][b][j] * m[(j, i)]).sum();
                }
            }
        }
        out
    }

    /// Boundary metric `g_ij = η_ab e^a_i e^b_j`.
    pub fn metric(&self) -> DMatrix<f64> {
        DMatrix::from_fn(3, 3, |i, j| (0..4).map(|a| ETA[a] * self.e[a][i] * self.e[a][j]).sum())
    }
}

/// `(c·e)^a_i = η_rs c^{ar} e^s_i`.
pub fn gauge_action(c: &Generator, e: &[[f64; 3]; 4]) -> [[f64; 3]; 4] {
    let mut out = [[0.0; 3]; 4];
    for (a, row) in out.iter_mut().enumerate() {
        for (i, x) in row.iter_mut().enumerate() {
            *x = (0..4).map(|r| c[a][r] * ETA[r] * e[r][i]).sum();
        }
    }
    out
}

/// Lorentz matrix `exp(a η)` for antisymmetric `a`.
pub fn lorentz_matrix(a: &Generator) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| a[i][j] * ETA[j]).exp()
}

pub fn random_generator<R: Rng>(rng: &mut R, scale: f64) -> Generator {
    let mut c = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in a + 1..4 {
            c[a][b] = rng.gen_range(-scale..scale);
            c[b][a] = -c[a][b];
        }
    }
    c
}

/// Constraint values and gradients at a state.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintData {
    /// `T_a`, from the time component of the coframe.
    pub energy: Vec<(f64, Vec<f64>)>,
    /// `P_{cd}` for `c < d`, from the time component of the connection.
    pub gauge: Vec<((usize, usize), f64, Vec<f64>)>,
}

impl ConstraintData {
    /// `P_c = GAUGE_SIGN Σ_{c<d} c^{cd} P_{cd}`, value and gradient.
    pub fn gauge_functional(&self, c: &Generator) -> (f64, Vec<f64>) {
        combine(self.gauge.iter().map(|((a, b), v, g)| (GAUGE_SIGN * c[*a][*b], *v, g)))
    }

    /// `T_μ = Σ_a μ^a T_a`.
    pub fn energy_functional(&self, mu: &[f64; 4]) -> (f64, Vec<f64>) {
        combine(self.energy.iter().zip(mu).map(|((v, g), m)| (*m, *v, g)))
    }

    /// Largest absolute constraint value.
    pub fn violation(&self) -> f64 {
        let e = self.energy.iter().map(|(v, _)| v.abs());
        let g = self.gauge.iter().map(|(_, v, _)| v.abs());
        e.chain(g).fold(0.0, f64::max)
    }
}

fn combine<'a>(terms: impl Iterator<Item = (f64, f64, &'a Vec<f64>)>) -> (f64, Vec<f64>) {
    let mut value = 0.0;
    let mut grad: Vec<f64> = Vec::new();
    for (k, v, g) in terms {
        value += k * v;
        if grad.is_empty() {
            grad = vec![0.0; g.len()];
        }
        for (x, y) in grad.iter_mut().zip(g) {
            *x += k * y;
        }
    }
    (value, grad)
}

/// `"w[0,1,0]"` into `("w", [0, 1, 0])`.
fn split_name(name: &str) -> (&str, Vec<usize>) {
    match name.split_once('[') {
        Some((f, rest)) => (
            f,
            rest.trim_end_matches(']').split(',').filter_map(|x| x.trim().parse().ok()).collect(),
        ),
        None => (name, Vec::new()),
    }
}

/// How well the hamiltonian vector field of `P_c` matches `c·e`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFieldCheck {
    /// Largest deviation of the coframe component from `c·e`.
    pub e_error: f64,
    pub residual: f64,
}

/// The shipped tetrad theory on one site.
#[derive(Clone, Debug)]
pub struct PcSite {
    pub model: LatticeModel,
}

impl PcSite {
    pub fn new(cosmological: f64) -> Result<Self, LatticeError> {
        let t = theories::builtin("pc4").map_err(|e| LatticeError::Shape(e.to_string()))?;
        let mut env = Environment::flat(&t);
        env.set_background("Lambda", &[], cosmological);
        Ok(PcSite {
            model: LatticeModel::new(t, env)?,
        })
    }

    fn index(&self, slot: Slot) -> usize {
        self.model.layout.index(&slot).expect("single-site layout covers e and w")
    }

    pub fn e_index(&self, a: usize, i: usize) -> usize {
        self.index(Slot::new("e", &[a as u8, i as u8 + 1]))
    }

    pub fn w_index(&self, c: usize, d: usize, i: usize) -> usize {
        self.index(Slot::new("w", &[c as u8, d as u8, i as u8 + 1]))
    }

    pub fn state(&self, f: &PcFields) -> FieldState {
        let mut s = self.model.zero_state(LatticeGrid::point());
        for i in 0..3 {
            for a in 0..4 {
                s.values[self.e_index(a, i)] = f.e[a][i];
                for b in a + 1..4 {
                    s.values[self.w_index(a, b, i)] = f.w[a][b][i];
                }
            }
        }
        s
    }

    pub fn two_form(&self, f: &PcFields) -> Result<TwoFormMatrix, LatticeError> {
        self.model.two_form(&self.state(f))
    }

    pub fn constraints(&self, f: &PcFields) -> Result<ConstraintData, LatticeError> {
        let s = self.state(f);
        let mut data = ConstraintData {
            energy: Vec::new(),
            gauge: Vec::new(),
        };
        for c in &self.model.constraints {
            let dens = self.model.compile(&c.raw, &s)?;
            let value = dens.integrate(&s, &self.model.env, None)?;
            let grad = dens.gradient(&s, &self.model.env, None)?;
            let (field, comp) = split_name(&c.name);
            match (field, comp.as_slice()) {
                ("e", [_, 0]) => data.energy.push((value, grad)),
                ("w", [a, b, 0]) => data.gauge.push(((*a, *b), value, grad)),
                _ => return Err(LatticeError::Shape(format!("unexpected constraint `{}`", c.name))),
            }
        }
        Ok(data)
    }

    /// Hubble rate of the homogeneous solution, from `T = 0`.
    pub fn hubble(&self) -> Result<f64, LatticeError> {
        // T_0 is a + b H² along the family
        let t0 = |h: f64| -> Result<f64, LatticeError> { Ok(self.constraints(&PcFields::de_sitter(h))?.energy[0].0) };
        let a = t0(0.0)?;
        let b = t0(1.0)? - a;
        let h2 = -a / b;
        if h2.is_nan() || h2 <= 0.0 {
            return Err(LatticeError::Shape(format!("no real homogeneous solution (H² = {h2})")));
        }
        Ok(h2.sqrt())
    }

    /// A homogeneous solution moved by a random Lorentz transformation and a
    /// random change of spatial basis.
    pub fn sample_on_surface<R: Rng>(&self, rng: &mut R) -> Result<PcFields, LatticeError> {
        let base = PcFields::de_sitter(self.hubble()?);
        loop {
            let l = lorentz_matrix(&random_generator(rng, 0.6));
            let m = DMatrix::<f64>::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.4..0.4));
            if m.determinant().abs() < 0.2 {
                continue;
            }
            let f = base.lorentz(&l).change_basis(&m);
            if f.metric().determinant().abs() > 1e-6 {
                return Ok(f);
            }
        }
    }

    /// Compares the hamiltonian vector field of `P_c` with `c·e`.
    pub fn gauge_field_check(&self, f: &PcFields, c: &Generator) -> Result<GaugeFieldCheck, LatticeError> {
        let m = self.two_form(f)?;
        let (_, grad) = self.constraints(f)?.gauge_functional(c);
        let x = hamiltonian_vector_field(&m, &grad);
        let expected = gauge_action(c, &f.e);
        let mut e_error = 0.0f64;
        for (a, row) in expected.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                e_error = e_error.max((x.x[self.e_index(a, i)] - v).abs());
            }
        }
        Ok(GaugeFieldCheck {
            e_error,
            residual: x.residual,
        })
    }

    /// Brackets among `P_c`, `P_c'` and `T_μ`.
    pub fn coisotropy(
        &self,
        f: &PcFields,
        c: &Generator,
        c2: &Generator,
        mu: &[f64; 4],
        tol: f64,
        max_violation: f64,
    ) -> Result<CoisotropyReport, LatticeError> {
        let m = self.two_form(f)?;
        let data = self.constraints(f)?;
        let fs = [data.gauge_functional(c), data.gauge_functional(c2), data.energy_functional(mu)];
        let values: Vec<f64> = fs.iter().map(|(v, _)| *v).collect();
        let grads: Vec<Vec<f64>> = fs.into_iter().map(|(_, g)| g).collect();
        coisotropy_check(&m, &grads, data.violation().max(values.iter().fold(0.0, |a, v| a.max(v.abs()))), tol, 1e-8, max_violation)
    }
}
