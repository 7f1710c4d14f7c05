//! Coefficient types shared by the exact and numeric layers.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{One, ToPrimitive, Zero};

use crate::expr::Rational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_i64(n: i64) -> Self;

    fn from_ratio(n: i64, d: i64) -> Self;

    /// Value part as a float.
    fn re(&self) -> f64;
}

impl Scalar for Rational {
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(n.into())
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        Rational::new(n.into(), d.into())
    }

    fn re(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }

    fn re(&self) -> f64 {
        *self
    }
}

/// Forward-mode dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn new(re: f64, eps: f64) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: f64) -> Self {
        Dual { re, eps: 0.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.re / o.re, (self.eps * o.re - self.re * o.eps) / (o.re * o.re))
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Dual::default()
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.eps == 0.0
    }
}

impl One for Dual {
    fn one() -> Self {
        Dual::constant(1.0)
    }
}

impl Scalar for Dual {
    fn from_i64(n: i64) -> Self {
        Dual::constant(n as f64)
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        Dual::constant(n as f64 / d as f64)
    }

    fn re(&self) -> f64 {
        self.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_product_rule() {
        let x = Dual::new(3.0, 1.0);
        let y = x * x * x - Dual::from_i64(2) * x;
        assert_eq!(y, Dual::new(21.0, 25.0));
        let q = Dual::one() / x;
        assert!((q.eps + 1.0 / 9.0).abs() < 1e-15);
    }
}
