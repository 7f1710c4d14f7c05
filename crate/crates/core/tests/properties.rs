//! Exact identities of the symbolic pipeline on random Lagrangians.

mod common;

use proptest::prelude::*;

use ktwb::calc_var::{ibp_split, variation, vertical_delta, TheorySpec};
use ktwb::cli::{emit_theory, parse_theory};
use ktwb::expr::{diff_jet, evaluate, parse_expr, total_derivative, AnySymbol, Expr, JetVar, MapEnv, Number, Rational};
use ktwb::theories;

use common::{boundary_term, lagrangian, theory_with, tree_text};

fn el_map(t: &TheorySpec) -> Vec<(JetVar, Expr)> {
    ibp_split(&variation(t), t).unwrap().el
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn delta_squared_vanishes(l in lagrangian()) {
        prop_assert_eq!(common::delta_squared(&l), Ok(()));
    }

    #[test]
    fn integration_by_parts_reconstructs(l in lagrangian()) {
        prop_assert_eq!(common::reconstruction(&l), Ok(()));
    }

    #[test]
    fn boundary_terms_shift_alpha_by_their_delta(l in lagrangian(), f in boundary_term()) {
        prop_assert_eq!(common::boundary_shift(&l, &f), Ok(()));
    }

    #[test]
    fn tangential_divergences_leave_el_unchanged(l in lagrangian(), f in boundary_term()) {
        let t = theory_with(l.clone());
        let shifted = theory_with(&l + &total_derivative(&f, 1).unwrap());
        prop_assert_eq!(el_map(&t), el_map(&shifted));
    }

    #[test]
    fn prolongation_commutator(e in lagrangian(), i in 0usize..2) {
        // ∂/∂u_i ∘ D_i = D_i ∘ ∂/∂u_i + ∂/∂u
        let ui = JetVar::field("u", &[]).with_deriv(i as u8);
        let lhs = diff_jet(&total_derivative(&e, i).unwrap(), &ui);
        let rhs = &total_derivative(&diff_jet(&e, &ui), i).unwrap() + &diff_jet(&e, &JetVar::field("u", &[]));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn normal_form_evaluates_like_the_tree(src in tree_text(), x in -20i64..20, y in -20i64..20) {
        let tree = parse_expr(&src, &AnySymbol).unwrap();
        let e = tree.normalize().unwrap();
        let mut env = MapEnv::new();
        env.bind(JetVar::field("x", &[]), Number::Exact(Rational::new(x.into(), 7.into())))
            .bind(JetVar::field("y", &[]), Number::Exact(Rational::new(y.into(), 5.into())));
        let a = tree.evaluate(&env).unwrap();
        let b = evaluate(&e, &env).unwrap();
        if a.is_exact() && b.is_exact() {
            prop_assert_eq!(a, b);
        } else {
            let (a, b) = (a.to_f64(), b.to_f64());
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn theory_text_round_trips(l in lagrangian()) {
        prop_assert_eq!(common::round_trip(&l), Ok(()));
    }
}

#[test]
fn shipped_theories_round_trip() {
    for name in theories::NAMES {
        let t = theories::builtin(name).unwrap();
        assert_eq!(parse_theory(&emit_theory(&t)).unwrap(), t, "{name}");
    }
}

#[test]
fn square_root_lagrangian_matches_hand_derivation() {
    // L = sqrt(1 + q'^2): E = q'' / sqrt(1 + q'^2)^3, α = q' / sqrt(1 + q'^2) δq
    let src = "theory s\ndim 1\ncoords t @transversal t\nfield q\nlagrangian \"sqrt(1 + q'^2)\"\njetorder 1\n";
    let t = parse_theory(src).unwrap();
    let split = ibp_split(&variation(&t), &t).unwrap();
    let q = JetVar::field("q", &[]);
    let e = split.el_of(&q).unwrap();
    let a = split.alpha_bulk.coefficient(std::slice::from_ref(&q));
    for (v, acc) in [(-3i64, 2i64), (1, -5), (4, 7), (0, 1)] {
        let mut env = MapEnv::new();
        env.bind(q.with_deriv(0), Number::Exact(Rational::new(v.into(), 3.into())))
            .bind(q.with_derivs(&[0, 0]), Number::Exact(Rational::new(acc.into(), 2.into())));
        let (v, acc) = (v as f64 / 3.0, acc as f64 / 2.0);
        let s = (1.0 + v * v).sqrt();
        let got_e = evaluate(e, &env).unwrap().to_f64();
        let got_a = evaluate(&a, &env).unwrap().to_f64();
        assert!((got_e - acc / s.powi(3)).abs() < 1e-14, "{got_e}");
        assert!((got_a - v / s).abs() < 1e-14, "{got_a}");
    }
}

#[test]
fn mechanics_normal_forms() {
    let t = theories::builtin("mechanics").unwrap();
    let split = ibp_split(&variation(&t), &t).unwrap();
    let parse = |s: &str| parse_expr(s, &AnySymbol).unwrap().normalize().unwrap();
    let q = JetVar::field("q", &[]);
    let e = split.el_of(&q).unwrap();
    assert_eq!(
        &(&parse("q''") * &Expr::var(JetVar::constant("m"))) + &Expr::apply("V", 1, Expr::var(q.clone())),
        *e
    );
    let omega = vertical_delta(&split.alpha).unwrap();
    assert_eq!(omega.len(), 1);
}
