//! Text and LaTeX rendering of normal forms.

use std::fmt;

use num::{One, Signed};

use super::poly::{Atom, Expr, Monomial};
use super::{JetVar, Rational};

/// Rendering options: derivatives along `transversal` print as primes
/// (text) or dots (LaTeX). In LaTeX, a name `q_tt` with `dot_suffix = 't'`
/// also prints as `\ddot q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Notation {
    pub transversal: Option<usize>,
    pub dot_suffix: Option<char>,
}

impl Notation {
    pub fn with_transversal(t: usize) -> Self {
        Notation {
            transversal: Some(t),
            dot_suffix: None,
        }
    }

    pub fn dotting(mut self, suffix: char) -> Self {
        self.dot_suffix = Some(suffix);
        self
    }
}

/// Parseable text form.
pub fn render(e: &Expr, n: &Notation) -> String {
    render_sum(e, n, false)
}

fn render_sum(e: &Expr, n: &Notation, latex: bool) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in e.terms().enumerate() {
        let neg = c.is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let body = if latex {
            latex_term(&c.abs(), m, n)
        } else {
            text_term(&c.abs(), m, n)
        };
        out.push_str(&body);
    }
    out
}

fn text_term(c: &Rational, m: &Monomial, n: &Notation) -> String {
    let mut parts = Vec::new();
    if !c.is_one() || m.is_one() {
        parts.push(c.to_string());
    }
    for (atom, k) in m.factors() {
        parts.push(text_factor(atom, k, n));
    }
    parts.join("*")
}

fn text_factor(atom: &Atom, k: i32, n: &Notation) -> String {
    let base = match atom {
        Atom::Var(v) => v.render(n.transversal),
        Atom::Apply { func, order, arg } => {
            format!("{func}{}({})", "'".repeat(*order as usize), render(arg, n))
        }
        Atom::Pow(b) => {
            let inner = render(b, n);
            if k % 2 != 0 {
                return with_exp(format!("sqrt({inner})"), k);
            }
            return with_exp(format!("({inner})"), k / 2);
        }
    };
    if k % 2 == 0 {
        with_exp(base, k / 2)
    } else {
        with_exp(format!("sqrt({base})"), k)
    }
}

fn with_exp(base: String, e: i32) -> String {
    if e == 1 {
        base
    } else {
        format!("{base}^{e}")
    }
}

/// LaTeX form using dots for transversal derivatives.
pub fn render_latex(e: &Expr, n: &Notation) -> String {
    render_sum(e, n, true)
}

fn latex_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

fn latex_term(c: &Rational, m: &Monomial, n: &Notation) -> String {
    let mut parts = Vec::new();
    if !c.is_one() || m.is_one() {
        parts.push(latex_rational(c));
    }
    for (atom, k) in m.factors() {
        parts.push(latex_factor(atom, k, n));
    }
    join_latex(&parts)
}

/// Juxtaposes factors, inserting a space only where tokens would merge.
pub(crate) fn join_latex(parts: &[String]) -> String {
    let mut out = String::new();
    for p in parts {
        if !out.is_empty() && !p.starts_with(['\\', '(', '{']) {
            out.push(' ');
        }
        out.push_str(p);
    }
    out
}

pub(crate) fn latex_name(name: &str) -> String {
    const GREEK: &[&str] = &[
        "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "kappa", "lambda",
        "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega", "Gamma",
        "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Phi", "Psi", "Omega",
    ];
    let (stem, suffix) = match name.split_once('_') {
        Some((a, b)) => (a, Some(b)),
        None => (name, None),
    };
    let stem = match stem {
        "eps" => "\\epsilon".to_string(),
        "sqrth" => "\\sqrt{h}".to_string(),
        "hinv" => "h^{-1}".to_string(),
        s if GREEK.contains(&s) => format!("\\{s}"),
        s => s.to_string(),
    };
    match suffix {
        Some(s) => format!("{stem}_{{{s}}}"),
        None => stem,
    }
}

pub fn latex_var(v: &JetVar, n: &Notation) -> String {
    let mut s = String::new();
    let mut dots = 0;
    for &d in &v.deriv {
        if Some(d as usize) == n.transversal {
            dots += 1;
        } else {
            s.push_str(&format!("\\partial_{{{d}}}"));
        }
    }
    let mut name = v.field.as_str();
    if let Some(c) = n.dot_suffix {
        if let Some((stem, tail)) = v.field.rsplit_once('_') {
            if !stem.is_empty() && !tail.is_empty() && tail.chars().all(|x| x == c) {
                dots += tail.chars().count();
                name = stem;
            }
        }
    }
    let mut core = latex_name(name);
    if !v.component.is_empty() {
        let idx: Vec<String> = v.component.iter().map(|c| c.to_string()).collect();
        core = format!("{core}_{{{}}}", idx.join(""));
    }
    let core = match dots {
        0 => core,
        1 => format!("\\dot {core}"),
        2 => format!("\\ddot {core}"),
        k => format!("{core}^{{({k})}}"),
    };
    s.push_str(&core);
    s
}

fn latex_factor(atom: &Atom, k: i32, n: &Notation) -> String {
    let (base, halves_base) = match atom {
        Atom::Var(v) => (latex_var(v, n), false),
        Atom::Apply { func, order, arg } => {
            let primes = if *order <= 3 {
                "'".repeat(*order as usize)
            } else {
                format!("^{{({order})}}")
            };
            (format!("{}{primes}({})", latex_name(func), render_latex(arg, n)), false)
        }
        Atom::Pow(b) => (render_latex(b, n), true),
    };
    if k % 2 != 0 {
        let root = format!("\\sqrt{{{base}}}");
        return if k == 1 { root } else { format!("{root}^{{{k}}}") };
    }
    let e = k / 2;
    let base = if halves_base { format!("({base})") } else { base };
    if e == 1 {
        base
    } else if base.contains('^') || base.starts_with("\\dot") || base.starts_with("\\ddot") {
        format!("{{{base}}}^{{{e}}}")
    } else {
        format!("{base}^{{{e}}}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, &Notation::default()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, AnySymbol};

    fn roundtrip(s: &str) {
        let e = parse_expr(s, &AnySymbol).unwrap().normalize().unwrap();
        let text = render(&e, &Notation::with_transversal(0));
        let back = parse_expr(&text, &AnySymbol).unwrap().normalize().unwrap();
        assert_eq!(back, e, "{s} -> {text}");
    }

    #[test]
    fn text_round_trips() {
        for s in [
            "1/2*m*q'^2 - V(q)",
            "sqrt(q[1]'^2 + q[2]'^2 + q[3]'^2)",
            "q[1]'/sqrt(q[1]'^2 + q[2]'^2)",
            "x^-3 + 3*sqrt(x)^5 - sqrt(2)",
            "(1 + x)^-2 * y + sqrt(-2*x)",
            "d[1]A[2]' * V''(phi + 1)",
            "0",
        ] {
            roundtrip(s);
        }
    }

    #[test]
    fn latex_uses_dots() {
        let e = parse_expr("m*q'", &AnySymbol).unwrap().normalize().unwrap();
        assert_eq!(render_latex(&e, &Notation::with_transversal(0)), "m\\dot q");
        let e = parse_expr("1/2*phi'^2", &AnySymbol).unwrap().normalize().unwrap();
        assert_eq!(
            render_latex(&e, &Notation::with_transversal(0)),
            "\\frac{1}{2}{\\dot \\phi}^{2}"
        );
    }
}
