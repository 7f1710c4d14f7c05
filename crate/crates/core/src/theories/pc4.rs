//! First-order tetrad gravity in four dimensions, assembled term by term.

use crate::calc_var::{BackgroundDecl, FieldDecl, Substitution, TheorySpec};
use crate::expr::{Expr, JetVar};
use crate::pointlin::{sort_with_sign, InternalSpace};

const D: usize = 4;

fn e(a: usize, mu: usize) -> Expr {
    Expr::var(JetVar::field("e", &[a as u8, mu as u8]))
}

/// Connection component `w^{cd}_mu`, antisymmetric in `c, d`.
fn w(c: usize, d: usize, mu: usize, deriv: Option<usize>) -> Expr {
    if c == d {
        return Expr::zero();
    }
    let (lo, hi, sign) = if c < d { (c, d, 1) } else { (d, c, -1) };
    let mut v = JetVar::field("w", &[lo as u8, hi as u8, mu as u8]);
    if let Some(k) = deriv {
        v = v.with_deriv(k as u8);
    }
    Expr::int(sign) * Expr::var(v)
}

/// `F^{cd}_{ρσ} = ∂_ρ w^{cd}_σ - ∂_σ w^{cd}_ρ + w^c_{fρ} w^{fd}_σ - w^c_{fσ} w^{fd}_ρ`.
fn curvature(c: usize, d: usize, rho: usize, sigma: usize, eta: &[i64]) -> Expr {
    let mut f = w(c, d, sigma, Some(rho)) - w(c, d, rho, Some(sigma));
    for g in 0..D {
        let s = Expr::int(eta[g]);
        f = f + &s * &(w(c, g, rho, None) * w(g, d, sigma, None))
            - &s * &(w(c, g, sigma, None) * w(g, d, rho, None));
    }
    f
}

fn permutations() -> Vec<([usize; 4], i64)> {
    let mut out = Vec::new();
    for a in 0..D {
        for b in 0..D {
            for c in 0..D {
                for d in 0..D {
                    let mut idx = [a, b, c, d];
                    if let Some(s) = sort_with_sign(&mut idx) {
                        out.push(([a, b, c, d], s));
                    }
                }
            }
        }
    }
    out
}

/// `ε_{abcd} ε^{μνρσ} (1/8 e^a_μ e^b_ν F^{cd}_{ρσ} + Λ/24 e^a_μ e^b_ν e^c_ρ e^d_σ)`
/// with `η = diag(-1, 1, 1, 1)` and `ε^{0123} = ε_{0123} = 1`.
pub fn lagrangian() -> Expr {
    let space = InternalSpace::minkowski(D);
    let lambda = Expr::var(JetVar::constant("Lambda"));
    let perms = permutations();
    let mut curv = std::collections::BTreeMap::new();
    let mut total = Expr::zero();
    for (m, sm) in &perms {
        let [mu, nu, rho, sigma] = *m;
        let mut gravity = Expr::zero();
        let mut volume = Expr::zero();
        for (a, sa) in &perms {
            let [p, q, r, s] = *a;
            let sign = Expr::int(sa * sm);
            let ee = &sign * &(e(p, mu) * e(q, nu));
            let f = curv
                .entry((r, s, rho, sigma))
                .or_insert_with(|| curvature(r, s, rho, sigma, &space.eta))
                .clone();
            gravity = gravity + &ee * &f;
            volume = volume + &ee * &(e(r, rho) * e(s, sigma));
        }
        total = total + Expr::ratio(1, 8) * gravity + &(&Expr::ratio(1, 24) * &lambda) * &volume;
    }
    total
}

pub fn theory() -> TheorySpec {
    let mut t = TheorySpec::new("pc4", &["t", "x", "y", "z"], 0);
    t.fields.push(FieldDecl {
        internal: 1,
        base: 1,
        idim: Some(D),
        ..FieldDecl::scalar("e")
    });
    t.fields.push(FieldDecl {
        internal: 2,
        base: 1,
        idim: Some(D),
        antisym: true,
        ..FieldDecl::scalar("w")
    });
    t.fields.push(FieldDecl {
        boundary: true,
        ..FieldDecl::scalar("rho")
    });
    t.fields.push(FieldDecl {
        internal: 1,
        idim: Some(D),
        boundary: true,
        ..FieldDecl::scalar("eps")
    });
    t.fields.push(FieldDecl {
        base: 1,
        boundary: true,
        ..FieldDecl::scalar("xi")
    });
    t.backgrounds.push(BackgroundDecl::constant("Lambda"));
    // transversal leg expanded in the basis (eps, e_1, e_2, e_3)
    for a in 0..D {
        let mut rhs = Expr::var(JetVar::field("rho", &[])) * Expr::var(JetVar::field("eps", &[a as u8]));
        for i in 1..D {
            rhs = rhs + Expr::var(JetVar::field("xi", &[i as u8])) * e(a, i);
        }
        t.substitutions.push(Substitution {
            lhs: JetVar::field("e", &[a as u8, 0]),
            rhs,
        });
    }
    t.lagrangian = lagrangian();
    t.jet_order = 1;
    t
}
