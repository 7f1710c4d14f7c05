//! Exact symbolic expressions over jet variables.

mod display;
mod eval;
pub mod jet;
mod poly;
mod tree;

use thiserror::Error;

pub use display::{latex_var, render, render_latex, Notation};
pub use eval::{evaluate, evaluate_f64, Env, MapEnv, Number};
pub use jet::{JetVar, VarKind};
pub use poly::{Atom, Expr, Monomial};
pub use tree::{parse_expr, AnySymbol, SymbolTable, Tree};

pub type Rational = num::BigRational;

/// Jet order ceiling used when none is configured.
pub const DEFAULT_MAX_JET_ORDER: usize = 3;

/// Coefficient size ceiling used by `Tree::normalize`.
pub const DEFAULT_COEFFICIENT_BITS: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("rational coefficient exceeds {0} bits")]
    ResourceLimit(u64),
    #[error("jet order {order} exceeds the configured maximum {max}")]
    OrderLimit { order: usize, max: usize },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("square root of negative value {0}")]
    SqrtNegative(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Partial derivative in a single jet variable.
pub fn diff_jet(e: &Expr, v: &JetVar) -> Expr {
    if !e.contains(v) {
        return Expr::zero();
    }
    e.derive(&mut |x| Ok(if x == v { Expr::one() } else { Expr::zero() }))
        .expect("partial derivatives of canonical expressions are total")
}

/// Total derivative along `coord` with the default jet order ceiling.
pub fn total_derivative(e: &Expr, coord: usize) -> Result<Expr, ExprError> {
    total_derivative_with(e, coord, DEFAULT_MAX_JET_ORDER)
}

pub fn total_derivative_with(e: &Expr, coord: usize, max_order: usize) -> Result<Expr, ExprError> {
    e.derive(&mut |v| {
        if v.kind.constant_along(coord) {
            return Ok(Expr::zero());
        }
        let next = v.with_deriv(coord as u8);
        if next.order() > max_order {
            return Err(ExprError::OrderLimit {
                order: next.order(),
                max: max_order,
            });
        }
        Ok(Expr::var(next))
    })
}

/// Replaces each listed variable by an expression.
pub fn substitute(e: &Expr, rules: &std::collections::BTreeMap<JetVar, Expr>) -> Result<Expr, ExprError> {
    e.substitute(&mut |v| rules.get(v).cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(derivs: &[u8]) -> JetVar {
        JetVar::field("q", &[]).with_derivs(derivs)
    }

    #[test]
    fn kinetic_partial() {
        let m = Expr::var(JetVar::constant("m"));
        let v = Expr::var(q(&[0]));
        let l = Expr::ratio(1, 2) * m.clone() * v.clone() * v.clone();
        assert_eq!(diff_jet(&l, &q(&[0])), m * v);
        assert!(diff_jet(&l, &q(&[])).is_zero());
    }

    #[test]
    fn opaque_potential_partial() {
        let l = Expr::apply("V", 0, Expr::var(q(&[])));
        assert_eq!(diff_jet(&l, &q(&[])), Expr::apply("V", 1, Expr::var(q(&[]))));
    }

    #[test]
    fn chain_rule_and_constants() {
        let v = Expr::var(q(&[0]));
        let d = total_derivative(&(v.clone() * v.clone()), 0).unwrap();
        assert_eq!(d, Expr::int(2) * v * Expr::var(q(&[0, 0])));
        assert!(total_derivative(&Expr::var(JetVar::constant("m")), 0)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn order_limit_is_reported() {
        let v = Expr::var(q(&[0, 0, 0]));
        assert_eq!(
            total_derivative(&v, 0),
            Err(ExprError::OrderLimit { order: 4, max: 3 })
        );
    }

    #[test]
    fn frozen_background_has_no_time_derivative() {
        let h = Expr::var(JetVar::background("h", &[1, 1], 0b1));
        assert!(total_derivative(&h, 0).unwrap().is_zero());
        assert!(!total_derivative(&h, 1).unwrap().is_zero());
    }

    fn poly_strategy() -> impl Strategy<Value = Expr> {
        let var = (0u8..2, prop::collection::vec(0u8..3, 0..2)).prop_map(|(f, d)| {
            let name = if f == 0 { "u" } else { "w" };
            Expr::var(JetVar::field(name, &[]).with_derivs(&d))
        });
        let leaf = prop_oneof![(-3i64..4).prop_map(Expr::int), var];
        leaf.prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner).prop_map(|(a, b)| a * b),
            ]
        })
    }

    proptest! {
        #[test]
        fn total_derivatives_commute(e in poly_strategy(), i in 0usize..3, j in 0usize..3) {
            let a = total_derivative(&total_derivative(&e, i).unwrap(), j).unwrap();
            let b = total_derivative(&total_derivative(&e, j).unwrap(), i).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn normalize_is_a_fixpoint_of_ring_operations(a in poly_strategy(), b in poly_strategy()) {
            let sum = &a + &b;
            prop_assert_eq!(&sum + &Expr::zero(), sum.clone());
            prop_assert_eq!(&b + &a, sum);
            prop_assert_eq!(&a * &b, &b * &a);
        }
    }
}
