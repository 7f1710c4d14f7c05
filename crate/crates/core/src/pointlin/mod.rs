//! Exact multilinear algebra of (k,l)-forms at a single point.
//!
//! A (k,l)-form is antisymmetric in `k` covector slots of the base and `l`
//! slots of the internal space `V`. The operators here compute the kernel
//! of the coframe wedge, the injectivity of `e ∧ (·)` on (2,1)-forms and
//! solve the structural constraint `eps ∧ d e = e ∧ σ` for the connection
//! shift.

mod form;
mod linalg;
mod ops;
pub mod sample;
mod scalar;

use thiserror::Error;

pub use form::{binomial, combination_rank, combinations, sort_with_sign, wedge, PForm, Shape};
pub use linalg::{Echelon, RatMatrix};
pub use ops::{
    boundary_metric, canonical_coframe, complete_coframe, coframe_kernel_dim, injective_w21,
    internal_act, is_boundary_nondegenerate, is_metric_nondegenerate, legs, linmap_kernel,
    structural_fix, structural_residuals, time_vector, w21_kernel, wedge_map, InternalSpace,
    LinMap, StructuralFix,
};
pub use scalar::{Dual, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PointError {
    #[error("degree overflow: result would have type ({k},{l})")]
    DegreeOverflow { k: usize, l: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degenerate coframe: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal logic failure: {0}")]
    InternalLogic(String),
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::sample::*;
    use super::*;
    use crate::expr::Rational;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(17)
    }

    #[test]
    fn random_coframes_have_six_dimensional_kernel() {
        let mut r = rng();
        for _ in 0..25 {
            let e = boundary_nondegenerate_coframe(&mut r);
            assert_eq!(coframe_kernel_dim(&e).unwrap(), 6);
            assert!(injective_w21(&e));
        }
    }

    #[test]
    fn kernel_dim_invariant_under_internal_change_of_basis() {
        let mut r = rng();
        let e = canonical_coframe(3, 4);
        for _ in 0..5 {
            let m = loop {
                let rows: Vec<Vec<Rational>> = (0..4)
                    .map(|_| (0..4).map(|_| Rational::from_i64(r.gen_range(-2..=2))).collect())
                    .collect();
                let m = RatMatrix::from_rows(&rows);
                if !num::Zero::is_zero(&m.determinant()) {
                    break m;
                }
            };
            let mut rotated = PForm::zero(Shape::boundary(1, 1));
            for i in 0..3 {
                for a in 0..4 {
                    let mut x = Rational::from_i64(0);
                    for b in 0..4 {
                        x += &m[(a, b)] * e.get(&[i], &[b]);
                    }
                    rotated.set(&[i], &[a], x);
                }
            }
            assert_eq!(coframe_kernel_dim(&rotated).unwrap(), 6);
        }
    }

    #[test]
    fn graded_commutativity() {
        let mut r = rng();
        for (k1, l1, k2, l2) in [(1, 1, 1, 1), (1, 2, 1, 1), (0, 1, 2, 1), (1, 1, 2, 2), (2, 1, 1, 3)] {
            let a = random_form(&mut r, Shape::boundary(k1, l1));
            let b = random_form(&mut r, Shape::boundary(k2, l2));
            let sign = if (k1 * k2 + l1 * l2) % 2 == 1 { -1 } else { 1 };
            let ab = a.wedge(&b).unwrap();
            let ba = b.wedge(&a).unwrap().scale(&Rational::from_i64(sign));
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn wedge_is_associative() {
        let mut r = rng();
        let a = random_form(&mut r, Shape::boundary(1, 1));
        let b = random_form(&mut r, Shape::boundary(0, 2));
        let c = random_form(&mut r, Shape::boundary(1, 1));
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn internal_act_is_linear() {
        let mut r = rng();
        let e = boundary_nondegenerate_coframe(&mut r);
        for _ in 0..10 {
            let v = random_form(&mut r, Shape::boundary(1, 2));
            let w = random_form(&mut r, Shape::boundary(1, 2));
            let c = Rational::from_ratio(r.gen_range(-5..=5), 3);
            let lhs = internal_act(&v.add(&w.scale(&c)), &e).unwrap();
            let rhs = internal_act(&v, &e).unwrap().add(&internal_act(&w, &e).unwrap().scale(&c));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn structural_fix_residuals_and_class_invariance() {
        let mut r = rng();
        for _ in 0..10 {
            let e = metric_nondegenerate_coframe(&mut r);
            let eps = completing_time_vector(&mut r, &e);
            let t = random_form(&mut r, Shape::boundary(2, 1));
            let fix = structural_fix(&e, &eps, &t).unwrap();
            let (a, b) = structural_residuals(&e, &eps, &t, &fix).unwrap();
            assert!(a.is_zero() && b.is_zero());

            let ker = linmap_kernel(&wedge_map(&e, Shape::boundary(1, 2)).unwrap());
            let mut v0 = PForm::zero(Shape::boundary(1, 2));
            for k in &ker {
                v0 = v0.add(&k.scale(&Rational::from_i64(r.gen_range(-3..=3))));
            }
            let shifted = t.add(&internal_act(&v0, &e).unwrap());
            let fix2 = structural_fix(&e, &eps, &shifted).unwrap();
            assert!(fix2.v.sub(&fix.v.sub(&v0)).is_zero());
        }
    }

    #[test]
    fn structural_fix_rejects_bad_eps() {
        let e = canonical_coframe(3, 4);
        let mut eps = PForm::zero(Shape::boundary(0, 1));
        eps.set(&[], &[1], Rational::from_i64(1));
        let t = PForm::zero(Shape::boundary(2, 1));
        assert!(matches!(structural_fix(&e, &eps, &t), Err(PointError::Precondition(_))));
    }
}
