//! Two-forms restricted to constraint surfaces.

use nalgebra::DMatrix;

use super::twoform::{null_space, restrict, singular_values, smallest_right_vectors, TwoFormMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedForm {
    /// Orthonormal basis of the tangent space, as columns.
    pub basis: DMatrix<f64>,
    pub reduced: DMatrix<f64>,
    /// Singular values of the reduced form, decreasing.
    pub singular: Vec<f64>,
    pub rank: usize,
    /// Kernel directions of the reduced form in state coordinates.
    pub kernel: Vec<Vec<f64>>,
}

/// Restricts `m` to the common kernel of the constraint gradients and
/// computes rank and kernel there.
pub fn constrained_two_form(m: &TwoFormMatrix, constraint_grads: &[Vec<f64>], tol: f64) -> ConstrainedForm {
    let basis = null_space(constraint_grads, m.dim(), 1e-12);
    let reduced = restrict(&m.to_dense(), &basis);
    let singular = singular_values(&reduced);
    let max = singular.first().copied().unwrap_or(0.0);
    let rank = singular.iter().filter(|&&s| s > tol * max).count();
    let kernel = smallest_right_vectors(&reduced, singular.len() - rank)
        .into_iter()
        .map(|k| (&basis * k).iter().copied().collect())
        .collect();
    ConstrainedForm {
        basis,
        reduced,
        singular,
        rank,
        kernel,
    }
}

/// `|⟨a, b⟩| / (|a| |b|)`.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot.abs() / (na * nb)
}
