//! The discretized presymplectic form and what is computed from it.

use nalgebra::{DMatrix, DVector};

use crate::calc_var::{LocalVarForm, TheorySpec};

use super::density::CompiledDensity;
use super::grid::LatticeGrid;
use super::state::{Environment, FieldState, Slot, StateLayout};
use super::LatticeError;

/// Default relative cut below which singular values count as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Largest system solved with a dense singular value decomposition.
pub const DENSE_LIMIT: usize = 1500;

/// Square sparse matrix with rows sorted by column.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            let row = &mut rows[i];
            match row.last_mut() {
                Some((c, x)) if *c == j => *x += v,
                _ => row.push((j, v)),
            }
        }
        for row in &mut rows {
            row.retain(|(_, v)| *v != 0.0);
        }
        SparseMatrix { n, rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |(c, _)| *c)
            .map_or(0.0, |k| self.rows[i][k].1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(j, v)| v * x[*j]).sum())
            .collect()
    }

    pub fn mul_t_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                out[*j] += v * x[i];
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                m[(i, *j)] = *v;
            }
        }
        m
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().all(|(j, v)| self.get(*j, i) == -v))
    }
}

/// `ω_{IJ}` over the flattened state, with `ω(X, Y) = Σ ω_{IJ} X^I Y^J`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormMatrix {
    pub matrix: SparseMatrix,
    pub theory: String,
    pub grid: LatticeGrid,
    pub layout: StateLayout,
}

impl TwoFormMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    pub fn pair(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matrix.mul_vec(y))
    }

    /// Entry between two named slots at given sites.
    pub fn entry(&self, a: (&Slot, usize), b: (&Slot, usize)) -> Option<f64> {
        let sites = self.grid.sites();
        let i = self.layout.index(a.0)? * sites + a.1;
        let j = self.layout.index(b.0)? * sites + b.1;
        Some(self.matrix.get(i, j))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Vertical differential of the discretized Noether form
/// `Σ_x w Σ c(x) δg(x)`. Antisymmetric by construction.
pub fn assemble_two_form(
    t: &TheorySpec,
    alpha: &LocalVarForm,
    state: &FieldState,
    env: &Environment,
) -> Result<TwoFormMatrix, LatticeError> {
    if alpha.degree() != 1 {
        return Err(LatticeError::Shape(format!("Noether form of degree {}", alpha.degree())));
    }
    let sites = state.grid.sites();
    let w = state.grid.weight();
    let mut triplets = Vec::new();
    for (gens, c) in alpha.terms() {
        let g = &gens[0];
        if !g.deriv.is_empty() {
            return Err(LatticeError::Shape(format!("generator with derivatives: δ{g}")));
        }
        let p = state
            .layout
            .index(&Slot::of(g))
            .ok_or_else(|| LatticeError::Shape(format!("no state slot for generator `{g}`")))?;
        let dens = CompiledDensity::new(c, t, state, env)?;
        for (x, col, val) in dens.jacobian(state, env)? {
            // ∂_I α_J with J = (p, x) and I = col
            let row = p * sites + x;
            triplets.push((col, row, w * val));
            triplets.push((row, col, -w * val));
        }
    }
    Ok(TwoFormMatrix {
        matrix: SparseMatrix::from_triplets(state.dim(), triplets),
        theory: t.name.clone(),
        grid: state.grid,
        layout: state.layout.clone(),
    })
}

/// Eigen-decomposition of the symmetric dilation `[[0, A], [Aᵀ, 0]]`,
/// whose eigenvalues are `±σ_i`. The iterative SVD loses accuracy on the
/// highly degenerate spectra of two-forms; the symmetric solver does not.
fn dilation(a: &DMatrix<f64>) -> nalgebra::SymmetricEigen<f64, nalgebra::Dyn> {
    let (r, c) = a.shape();
    let mut d = DMatrix::zeros(r + c, r + c);
    d.view_mut((0, r), (r, c)).copy_from(a);
    d.view_mut((r, 0), (c, r)).copy_from(&a.transpose());
    d.symmetric_eigen()
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = dilation(m).eigenvalues.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.truncate(m.nrows().min(m.ncols()));
    s.iter().map(|x| x.max(0.0)).collect()
}

/// The `count` right singular vectors with the smallest singular values.
pub fn smallest_right_vectors(m: &DMatrix<f64>, count: usize) -> Vec<DVector<f64>> {
    let eig = (m.transpose() * m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.iter().take(count).map(|&i| eig.eigenvectors.column(i).into_owned()).collect()
}

fn rank_of(s: &[f64], tol: f64) -> usize {
    let max = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > tol * max).count()
}

/// Number of singular values above `tol` times the largest.
pub fn two_form_rank(m: &TwoFormMatrix, tol: f64) -> usize {
    rank_of(&singular_values(&m.to_dense()), tol)
}

/// Orthonormal basis (as columns) of the common kernel of the given rows.
pub fn null_space(rows: &[Vec<f64>], n: usize, tol: f64) -> DMatrix<f64> {
    if rows.is_empty() {
        return DMatrix::identity(n, n);
    }
    let g = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let eig = (g.transpose() * &g).symmetric_eigen();
    let max = eig.eigenvalues.max();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= tol * max).collect();
    DMatrix::from_fn(n, keep.len(), |i, k| eig.eigenvectors[(i, keep[k])])
}

/// A two-form restricted to the span of the columns of `basis`.
pub fn restrict(m: &DMatrix<f64>, basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis.transpose() * m * basis
}

/// Solution of `ι_X ω + dF = 0` together with the norm of its defect.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianField {
    pub x: Vec<f64>,
    pub residual: f64,
}

/// Minimum-norm least-squares solution of `ι_X ω = -dF`. With
/// `(ι_X ω)_J = Σ_I X^I ω_{IJ}` and `ω` antisymmetric this is `ω X = dF`.
pub fn hamiltonian_vector_field(m: &TwoFormMatrix, df: &[f64]) -> HamiltonianField {
    let x = if m.dim() <= DENSE_LIMIT {
        dense_min_norm(&m.to_dense(), df, RANK_TOLERANCE)
    } else {
        cgls(&m.matrix, df, 1e-14, 20 * m.dim())
    };
    let defect: Vec<f64> = m.matrix.mul_vec(&x).iter().zip(df).map(|(a, b)| b - a).collect();
    HamiltonianField {
        residual: norm(&defect),
        x,
    }
}

/// `X = A⁺ b` with singular values below `tol · σ_max` dropped, read off
/// the dilation: its pseudo-inverse maps `(b, 0)` to `(0, A⁺ b)`.
pub fn dense_min_norm(a: &DMatrix<f64>, b: &[f64], tol: f64) -> Vec<f64> {
    let r = a.nrows();
    let eig = dilation(a);
    let max = eig.eigenvalues.amax();
    let mut x = DVector::zeros(a.ncols());
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() > tol * max {
            let z = eig.eigenvectors.column(i);
            let coef = z.rows(0, r).iter().zip(b).map(|(p, q)| p * q).sum::<f64>() / l;
            x.axpy(coef, &z.rows(r, a.ncols()), 1.0);
        }
    }
    x.iter().copied().collect()
}

/// Conjugate gradients on the normal equations, started from zero so the
/// limit is the minimum-norm least-squares solution.
pub fn cgls(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let n = a.dim();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut s = a.mul_t_vec(&r);
    let stop = tol * norm(&s).max(f64::MIN_POSITIVE);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    for _ in 0..max_iter {
        if gamma.sqrt() <= stop {
            break;
        }
        let q = a.mul_vec(&p);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for i in 0..n {
            x[i] += alpha * p[i];
        }
        for i in 0..r.len() {
            r[i] -= alpha * q[i];
        }
        s = a.mul_t_vec(&r);
        let next = dot(&s, &s);
        let beta = next / gamma;
        gamma = next;
        for i in 0..n {
            p[i] = s[i] + beta * p[i];
        }
    }
    x
}

/// `{F, G} = dG(X_F)`, refused when either hamiltonian vector field leaves a
/// residual above `threshold`.
pub fn poisson_bracket(m: &TwoFormMatrix, df: &[f64], dg: &[f64], threshold: f64) -> Result<f64, LatticeError> {
    let xf = hamiltonian_vector_field(m, df);
    let xg = hamiltonian_vector_field(m, dg);
    let worst = xf.residual.max(xg.residual);
    if worst > threshold {
        return Err(LatticeError::IllDefinedBracket { residual: worst, threshold });
    }
    Ok(dot(dg, &xf.x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge() {
        let m = SparseMatrix::from_triplets(2, vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, -3.0), (1, 1, 0.0)]);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.nnz(), 2);
        assert!(m.is_antisymmetric());
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![3.0, -3.0]);
        assert_eq!(m.mul_t_vec(&[1.0, 1.0]), vec![-3.0, 3.0]);
    }

    #[test]
    fn cgls_matches_dense_min_norm() {
        let m = SparseMatrix::from_triplets(
            4,
            vec![(0, 2, 1.0), (2, 0, -1.0), (1, 2, 2.0), (2, 1, -2.0), (0, 1, 0.5), (1, 0, -0.5)],
        );
        let b = [0.3, -0.1, 0.7, 0.0];
        let x1 = cgls(&m, &b, 1e-15, 100);
        let x2 = dense_min_norm(&m.to_dense(), &b, 1e-12);
        for (a, c) in x1.iter().zip(&x2) {
            assert!((a - c).abs() < 1e-10, "{x1:?} vs {x2:?}");
        }
    }

    #[test]
    fn null_space_of_one_row() {
        let ns = null_space(&[vec![0.0, 0.0, 1.0]], 3, 1e-12);
        assert_eq!(ns.ncols(), 2);
        for k in 0..2 {
            assert!(ns[(2, k)].abs() < 1e-14);
        }
    }
}
