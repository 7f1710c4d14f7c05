//! Numeric evaluation of expressions.

use std::collections::BTreeMap;
use std::fmt;

use num::{Signed, ToPrimitive, Zero};

use super::poly::{Atom, Expr};
use super::{ExprError, JetVar, Rational};

/// Exact rational when possible, float once an irrational value appears.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Number::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn add(&self, o: &Number) -> Number {
        match (self, o) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a + b),
            _ => Number::Float(self.to_f64() + o.to_f64()),
        }
    }

    pub fn mul(&self, o: &Number) -> Number {
        match (self, o) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a * b),
            _ => Number::Float(self.to_f64() * o.to_f64()),
        }
    }

    pub fn neg(&self) -> Number {
        match self {
            Number::Exact(a) => Number::Exact(-a),
            Number::Float(x) => Number::Float(-x),
        }
    }

    pub fn recip(&self) -> Result<Number, ExprError> {
        match self {
            Number::Exact(a) if a.is_zero() => Err(ExprError::DivisionByZero),
            Number::Exact(a) => Ok(Number::Exact(a.recip())),
            Number::Float(x) if *x == 0.0 => Err(ExprError::DivisionByZero),
            Number::Float(x) => Ok(Number::Float(1.0 / x)),
        }
    }

    /// `self^(h/2)`.
    pub fn powh(&self, h: i32) -> Result<Number, ExprError> {
        if h % 2 == 0 {
            return match self {
                Number::Exact(a) => {
                    if a.is_zero() && h < 0 {
                        Err(ExprError::DivisionByZero)
                    } else {
                        Ok(Number::Exact(num::traits::Pow::pow(a, h / 2)))
                    }
                }
                Number::Float(x) => Ok(Number::Float(x.powi(h / 2))),
            };
        }
        match self {
            Number::Exact(a) => {
                if a.is_negative() {
                    return Err(ExprError::SqrtNegative(a.to_string()));
                }
                if a.is_zero() && h < 0 {
                    return Err(ExprError::DivisionByZero);
                }
                let n = num::integer::Roots::sqrt(a.numer());
                let d = num::integer::Roots::sqrt(a.denom());
                if &(&n * &n) == a.numer() && &(&d * &d) == a.denom() {
                    Number::Exact(Rational::new(n, d)).powh(2 * h)
                } else {
                    Ok(Number::Float(self.to_f64().sqrt().powi(h)))
                }
            }
            Number::Float(x) => {
                if *x < 0.0 {
                    return Err(ExprError::SqrtNegative(x.to_string()));
                }
                if *x == 0.0 && h < 0 {
                    return Err(ExprError::DivisionByZero);
                }
                Ok(Number::Float(x.sqrt().powi(h)))
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => write!(f, "{r}"),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Values for jet variables and opaque functions.
pub trait Env {
    fn value(&self, v: &JetVar) -> Option<Number>;

    /// The `order`-th derivative of `func` at `arg`.
    fn call(&self, _func: &str, _order: u32, _arg: &Number) -> Option<Number> {
        None
    }
}

type FuncTable = Box<dyn Fn(&str, u32, &Number) -> Option<Number> + Send + Sync>;

/// Explicit variable bindings plus an optional function table.
#[derive(Default)]
pub struct MapEnv {
    pub vars: BTreeMap<JetVar, Number>,
    pub funcs: Option<FuncTable>,
}

impl MapEnv {
    pub fn new() -> Self {
        MapEnv::default()
    }

    pub fn bind(&mut self, v: JetVar, x: Number) -> &mut Self {
        self.vars.insert(v, x);
        self
    }

    pub fn with_functions<F>(mut self, f: F) -> Self
    where
        F: Fn(&str, u32, &Number) -> Option<Number> + Send + Sync + 'static,
    {
        self.funcs = Some(Box::new(f));
        self
    }
}

impl Env for MapEnv {
    fn value(&self, v: &JetVar) -> Option<Number> {
        self.vars.get(v).cloned()
    }

    fn call(&self, func: &str, order: u32, arg: &Number) -> Option<Number> {
        self.funcs.as_ref().and_then(|f| f(func, order, arg))
    }
}

pub fn evaluate(e: &Expr, env: &dyn Env) -> Result<Number, ExprError> {
    let mut total = Number::Exact(Rational::zero());
    for (m, c) in e.terms() {
        let mut acc = Number::Exact(c.clone());
        for (atom, k) in m.factors() {
            let base = match atom {
                Atom::Var(v) => env.value(v).ok_or_else(|| ExprError::Unbound(v.to_string()))?,
                Atom::Apply { func, order, arg } => {
                    let x = evaluate(arg, env)?;
                    env.call(func, *order, &x)
                        .ok_or_else(|| ExprError::UnknownFunction(func.clone()))?
                }
                Atom::Pow(b) => evaluate(b, env)?,
            };
            acc = acc.mul(&base.powh(k)?);
        }
        total = total.add(&acc);
    }
    Ok(total)
}

/// Float-only evaluation for hot loops.
pub fn evaluate_f64(
    e: &Expr,
    vars: &dyn Fn(&JetVar) -> Option<f64>,
    funcs: &dyn Fn(&str, u32, f64) -> Option<f64>,
) -> Result<f64, ExprError> {
    let mut total = 0.0;
    for (m, c) in e.terms() {
        let mut acc = c.to_f64().unwrap_or(f64::NAN);
        for (atom, k) in m.factors() {
            let base = match atom {
                Atom::Var(v) => vars(v).ok_or_else(|| ExprError::Unbound(v.to_string()))?,
                Atom::Apply { func, order, arg } => {
                    let x = evaluate_f64(arg, vars, funcs)?;
                    funcs(func, *order, x).ok_or_else(|| ExprError::UnknownFunction(func.clone()))?
                }
                Atom::Pow(b) => evaluate_f64(b, vars, funcs)?,
            };
            acc *= if k % 2 == 0 {
                base.powi(k / 2)
            } else {
                if base < 0.0 {
                    return Err(ExprError::SqrtNegative(base.to_string()));
                }
                base.sqrt().powi(k)
            };
        }
        total += acc;
    }
    Ok(total)
}

impl From<i64> for Number {
    fn from(n: i64) -> Self {
        Number::Exact(Rational::from_integer(n.into()))
    }
}

impl From<Rational> for Number {
    fn from(r: Rational) -> Self {
        Number::Exact(r)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Float(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinetic_value_is_exact() {
        let m = JetVar::constant("m");
        let v = JetVar::field("q", &[]).with_deriv(0);
        let e = Expr::var(m.clone()) * Expr::var(v.clone()) * Expr::var(v.clone());
        let mut env = MapEnv::new();
        env.bind(m, 2.into()).bind(v, 3.into());
        assert_eq!(evaluate(&e, &env).unwrap(), Number::from(18));
        assert_eq!(evaluate(&Expr::zero(), &env).unwrap(), Number::from(0));
    }

    #[test]
    fn unbound_and_negative_sqrt() {
        let x = JetVar::field("x", &[]);
        let e = Expr::var(x.clone()).sqrt().unwrap();
        assert!(matches!(evaluate(&e, &MapEnv::new()), Err(ExprError::Unbound(_))));
        let mut env = MapEnv::new();
        env.bind(x, (-4).into());
        assert!(matches!(evaluate(&e, &env), Err(ExprError::SqrtNegative(_))));
    }

    #[test]
    fn irrational_values_become_float() {
        let x = JetVar::field("x", &[]);
        let e = Expr::var(x.clone()).sqrt().unwrap();
        let mut env = MapEnv::new();
        env.bind(x.clone(), 2.into());
        assert!(!evaluate(&e, &env).unwrap().is_exact());
        env.bind(x, Number::Exact(Rational::new(9.into(), 4.into())));
        assert_eq!(
            evaluate(&e, &env).unwrap(),
            Number::Exact(Rational::new(3.into(), 2.into()))
        );
    }
}
