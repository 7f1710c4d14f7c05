//! Random Lagrangians and the exact identities checked on them.

#![allow(dead_code)]

use proptest::prelude::*;

use ktwb::calc_var::{ibp_split, variation, vertical_delta, LocalVarForm, TheorySpec};
use ktwb::cli::{emit_theory, parse_theory};
use ktwb::expr::{total_derivative, Expr, JetVar};

pub const FIELD_THEORY: &str = "theory p\ndim 2\ncoords t x @transversal t\nfield u\nfield w\njetorder 2\n";

pub fn theory_with(l: Expr) -> TheorySpec {
    let mut t = parse_theory(FIELD_THEORY).unwrap();
    t.lagrangian = l;
    t
}

pub fn jet(name: &str, d: &[u8]) -> Expr {
    Expr::var(JetVar::field(name, &[]).with_derivs(d))
}

/// Polynomials in the fields and their first jets.
pub fn lagrangian() -> impl Strategy<Value = Expr> {
    let var = (0u8..2, prop::collection::vec(0u8..2, 0..2)).prop_map(|(f, d)| jet(if f == 0 { "u" } else { "w" }, &d));
    let leaf = prop_oneof![(-3i64..4).prop_map(Expr::int), var];
    leaf.prop_recursive(3, 10, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner).prop_map(|(a, b)| a * b),
        ]
    })
}

/// Polynomials in `u`, `u_t`, `w` only, so `D_t f` stays within jet order two.
pub fn boundary_term() -> impl Strategy<Value = Expr> {
    let var = prop_oneof![Just(jet("u", &[])), Just(jet("u", &[0])), Just(jet("w", &[]))];
    let leaf = prop_oneof![(-3i64..4).prop_map(Expr::int), var];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner).prop_map(|(a, b)| a * b),
        ]
    })
}

/// Source text for a random expression in `x` and `y` with square roots.
pub fn tree_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (-4i64..5).prop_map(|n| format!("({n})")),
        (1i64..5, 1i64..5).prop_map(|(a, b)| format!("({a}/{b})")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.prop_map(|a| format!("sqrt(1 + ({a})^2)")),
        ]
    })
}

pub fn delta_squared(l: &Expr) -> Result<(), String> {
    let d1 = vertical_delta(&LocalVarForm::scalar(l.clone())).map_err(|e| e.to_string())?;
    let d2 = vertical_delta(&d1).map_err(|e| e.to_string())?;
    if d2.is_zero() {
        Ok(())
    } else {
        Err(format!("δδL = {d2:?}"))
    }
}

pub fn reconstruction(l: &Expr) -> Result<(), String> {
    let t = theory_with(l.clone());
    let v = variation(&t);
    let split = ibp_split(&v, &t).map_err(|e| e.to_string())?;
    if split.reconstruct(&t).map_err(|e| e.to_string())? == v {
        Ok(())
    } else {
        Err("pieces do not add up to δL".into())
    }
}

/// `L + D_t f` has the same Euler-Lagrange densities and `α + δf`.
pub fn boundary_shift(l: &Expr, f: &Expr) -> Result<(), String> {
    let t = theory_with(l.clone());
    let shifted = theory_with(l + &total_derivative(f, 0).map_err(|e| e.to_string())?);
    let a = ibp_split(&variation(&t), &t).map_err(|e| e.to_string())?;
    let b = ibp_split(&variation(&shifted), &shifted).map_err(|e| e.to_string())?;
    if a.el != b.el {
        return Err("el changed".into());
    }
    let df = vertical_delta(&LocalVarForm::scalar(f.clone())).map_err(|e| e.to_string())?;
    if b.alpha_bulk != a.alpha_bulk.add(&df) {
        return Err("alpha did not shift by δf".into());
    }
    Ok(())
}

pub fn round_trip(l: &Expr) -> Result<(), String> {
    let t = theory_with(l.clone());
    let back = parse_theory(&emit_theory(&t)).map_err(|e| e.to_string())?;
    if back == t {
        Ok(())
    } else {
        Err("theory changed through its text form".into())
    }
}
