//! Seeded samplers for exact coframes, time-like vectors and (2,1)-forms.

use rand::Rng;

use crate::expr::Rational;

use super::form::{PForm, Shape};
use super::ops::{
    coframe_kernel_dim, injective_w21, is_boundary_nondegenerate, is_metric_nondegenerate, legs, structural_fix,
    structural_residuals, InternalSpace,
};
use super::linalg::RatMatrix;
use super::scalar::Scalar;

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::from_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

/// Random rational form of the given type.
pub fn random_form<R: Rng>(rng: &mut R, shape: Shape) -> PForm<Rational> {
    let coeffs = (0..shape.dim()).map(|_| small_rational(rng)).collect();
    PForm::from_vec(shape, coeffs).expect("dimension matches")
}

/// Boundary coframe with linearly independent legs.
pub fn boundary_nondegenerate_coframe<R: Rng>(rng: &mut R) -> PForm<Rational> {
    loop {
        let e = random_form(rng, Shape::boundary(1, 1));
        if is_boundary_nondegenerate(&e) {
            return e;
        }
    }
}

/// Boundary coframe whose induced metric is nondegenerate.
pub fn metric_nondegenerate_coframe<R: Rng>(rng: &mut R) -> PForm<Rational> {
    loop {
        let e = random_form(rng, Shape::boundary(1, 1));
        if is_metric_nondegenerate(&e) {
            return e;
        }
    }
}

/// Time-like vector completing the legs of `e` to a basis of `V`.
pub fn completing_time_vector<R: Rng>(rng: &mut R, e: &PForm<Rational>) -> PForm<Rational> {
    let s = e.shape();
    let space = InternalSpace::minkowski(s.d);
    loop {
        let mut v: Vec<Rational> = (0..s.d).map(|_| Rational::from_i64(rng.gen_range(-1..=1))).collect();
        v[0] = Rational::from_i64(rng.gen_range(2..=4) * if rng.gen_bool(0.5) { 1 } else { -1 });
        if space.inner(&v, &v) >= Rational::from_i64(0) {
            continue;
        }
        let mut rows = legs(e);
        rows.push(v.clone());
        if RatMatrix::from_rows(&rows).rank() == s.d {
            return PForm::from_vec(Shape { k: 0, l: 1, ..s }, v).expect("dimension matches");
        }
    }
}

/// Tallies of the pointwise checks over a batch of samples.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct PointCheckReport {
    pub samples: usize,
    /// Samples whose coframe kernel on (1,2)-forms has dimension six.
    pub kernel_six: usize,
    pub injective: usize,
    /// Samples where the structural solve succeeded with zero residuals and
    /// no freedom in `v`.
    pub structural_exact: usize,
    pub kernel_dims: Vec<usize>,
}

impl PointCheckReport {
    pub fn all_passed(&self) -> bool {
        self.kernel_six == self.samples && self.injective == self.samples && self.structural_exact == self.samples
    }
}

/// Runs kernel, injectivity and structural checks on `count` metric
/// nondegenerate coframes with random time-like `eps` and torsion-like `T`.
pub fn point_checks<R: Rng>(rng: &mut R, count: usize) -> PointCheckReport {
    let mut report = PointCheckReport {
        samples: count,
        ..Default::default()
    };
    for _ in 0..count {
        let e = metric_nondegenerate_coframe(rng);
        let eps = completing_time_vector(rng, &e);
        let t = random_form(rng, Shape::boundary(2, 1));
        let dim = coframe_kernel_dim(&e).unwrap_or(usize::MAX);
        report.kernel_dims.push(dim);
        report.kernel_six += usize::from(dim == 6);
        report.injective += usize::from(injective_w21(&e));
        let exact = structural_fix(&e, &eps, &t).and_then(|fix| {
            let (a, b) = structural_residuals(&e, &eps, &t, &fix)?;
            Ok(a.is_zero() && b.is_zero())
        });
        report.structural_exact += usize::from(exact == Ok(true));
    }
    report
}
