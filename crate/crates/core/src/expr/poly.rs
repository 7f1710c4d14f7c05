//! Canonical sums of monomials with exact rational coefficients.
//!
//! A monomial is a product of atoms raised to exponents counted in halves,
//! so `x^(1/2)` is stored as `(x, 1)`. Atoms are jet variables, applied
//! opaque functions, and powers of compound bases that cannot be expanded
//! (square roots and reciprocals of sums). Every constructor returns the
//! canonical form; structural equality is equality of normal forms.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, One, Signed, Zero};

use super::jet::JetVar;
use super::{ExprError, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(JetVar),
    /// `func` differentiated `order` times, applied to `arg`.
    Apply {
        func: String,
        order: u32,
        arg: Box<Expr>,
    },
    /// A base that is not a bare variable: a sum, a non-square constant,
    /// or a compound monomial. Its exponent (in halves) is 1 or, for sums,
    /// any negative value.
    Pow(Box<Expr>),
}

/// Product of atoms; exponents are in halves and never zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Atom, i32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Atom, i32)> {
        self.0.iter().map(|(a, &k)| (a, k))
    }

    pub fn single(atom: Atom, halves: i32) -> Self {
        let mut m = BTreeMap::new();
        if halves != 0 {
            m.insert(atom, halves);
        }
        Monomial(m)
    }

    fn merge(&mut self, atom: Atom, halves: i32) {
        use std::collections::btree_map::Entry;
        match self.0.entry(atom) {
            Entry::Vacant(v) => {
                if halves != 0 {
                    v.insert(halves);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += halves;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: BTreeMap<Monomial, Rational>,
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

fn rat_pow(r: &Rational, n: i32) -> Result<Rational, ExprError> {
    if r.is_zero() && n < 0 {
        return Err(ExprError::DivisionByZero);
    }
    Ok(num::traits::Pow::pow(r, n))
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Expr::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(rat(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::constant(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(v: JetVar) -> Self {
        Expr::term(Rational::one(), Monomial::single(Atom::Var(v), 2))
    }

    /// `f^(order)(arg)`.
    pub fn apply(func: &str, order: u32, arg: Expr) -> Self {
        Expr::term(
            Rational::one(),
            Monomial::single(
                Atom::Apply {
                    func: func.to_string(),
                    order,
                    arg: Box::new(arg),
                },
                2,
            ),
        )
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Coefficient of the first monomial in the term order.
    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    /// Divides by the leading coefficient so the result is monic.
    pub fn monic(&self) -> Expr {
        match self.leading_coefficient() {
            Some(c) => self.scale(&c.recip()),
            None => Expr::zero(),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(k) => {
                *k += c;
                if k.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn add_assign_ref(&mut self, other: &Expr) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    fn mul_ref(&self, other: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                match monomial_product(ma, mb) {
                    Product::Simple(m) => out.add_term(m, c),
                    Product::Expanded(e) => out.add_assign_ref(&e.scale(&c)),
                }
            }
        }
        out
    }

    /// Integer power.
    pub fn pow(&self, n: i32) -> Result<Expr, ExprError> {
        self.powh(2 * n)
    }

    pub fn sqrt(&self) -> Result<Expr, ExprError> {
        self.powh(1)
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        self.powh(-2)
    }

    /// `self^(h/2)`.
    pub fn powh(&self, h: i32) -> Result<Expr, ExprError> {
        if h == 0 {
            return Ok(Expr::one());
        }
        if self.is_zero() {
            return if h > 0 {
                Ok(Expr::zero())
            } else {
                Err(ExprError::DivisionByZero)
            };
        }
        if h > 0 && h % 2 == 0 {
            return Ok(self.int_pow(h / 2));
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return const_powh(c, h);
            }
            if h % 2 == 0 {
                let c = Expr::constant(rat_pow(c, h / 2)?);
                return Ok(c.mul_ref(&monomial_int_pow(m, h / 2)));
            }
            if c.is_positive() {
                if let Some((Atom::Var(_), 2)) = single_factor(m) {
                    let (a, _) = single_factor(m).unwrap();
                    let var = Expr::term(Rational::one(), Monomial::single(a.clone(), h));
                    return Ok(const_powh(c, h)?.mul_ref(&var));
                }
            }
            let pre = self.powh(h - 1)?;
            return Ok(pre.mul_ref(&pow_atom(self.clone(), 1)));
        }
        // a sum of two or more terms
        let lead = self.leading_coefficient().unwrap().clone();
        if h % 2 == 0 {
            let monic = self.scale(&lead.recip());
            let c = Expr::constant(rat_pow(&lead, h / 2)?);
            return Ok(c.mul_ref(&pow_atom(monic, h)));
        }
        let (pre, base) = if lead.is_positive() {
            (const_powh(&lead, h)?, self.scale(&lead.recip()))
        } else {
            (Expr::one(), self.clone())
        };
        let body = if h >= 2 {
            base.int_pow((h - 1) / 2).mul_ref(&pow_atom(base, 1))
        } else {
            pow_atom(base, h)
        };
        Ok(pre.mul_ref(&body))
    }

    fn int_pow(&self, n: i32) -> Expr {
        debug_assert!(n >= 0);
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul_ref(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_ref(&base);
            }
        }
        result
    }

    /// Every jet variable occurring anywhere, including inside function
    /// arguments and compound bases.
    pub fn vars(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<JetVar>) {
        for m in self.terms.keys() {
            for (a, _) in m.factors() {
                match a {
                    Atom::Var(v) => {
                        out.insert(v.clone());
                    }
                    Atom::Apply { arg, .. } => arg.collect_vars(out),
                    Atom::Pow(b) => b.collect_vars(out),
                }
            }
        }
    }

    pub fn contains(&self, v: &JetVar) -> bool {
        self.terms.keys().any(|m| m.factors().any(|(a, _)| atom_contains(a, v)))
    }

    /// Largest coefficient size in bits, over all nesting levels.
    pub fn max_coefficient_bits(&self) -> u64 {
        let mut best = 0;
        for (m, c) in &self.terms {
            best = best.max(c.numer().bits()).max(c.denom().bits());
            for (a, _) in m.factors() {
                let inner = match a {
                    Atom::Var(_) => 0,
                    Atom::Apply { arg, .. } => arg.max_coefficient_bits(),
                    Atom::Pow(b) => b.max_coefficient_bits(),
                };
                best = best.max(inner);
            }
        }
        best
    }

    /// Chain-rule engine: `d` gives the derivative of each jet variable.
    pub fn derive<F>(&self, d: &mut F) -> Result<Expr, ExprError>
    where
        F: FnMut(&JetVar) -> Result<Expr, ExprError>,
    {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            for (atom, k) in m.factors() {
                let inner = match atom {
                    Atom::Var(v) => d(v)?,
                    Atom::Apply { func, order, arg } => {
                        let da = arg.derive(d)?;
                        if da.is_zero() {
                            continue;
                        }
                        Expr::apply(func, order + 1, (**arg).clone()).mul_ref(&da)
                    }
                    Atom::Pow(b) => b.derive(d)?,
                };
                if inner.is_zero() {
                    continue;
                }
                // d(a^(k/2)) = (k/2) a^((k-2)/2) da
                let mut rest = m.clone();
                rest.0.remove(atom);
                let lowered = match atom {
                    Atom::Pow(b) => b.powh(k - 2)?,
                    _ => Expr::term(Rational::one(), Monomial::single(atom.clone(), k - 2)),
                };
                let factor = Rational::new(BigInt::from(k), BigInt::from(2)) * c;
                let piece = canonical(factor, rest).mul_ref(&lowered).mul_ref(&inner);
                out.add_assign_ref(&piece);
            }
        }
        Ok(out)
    }

    /// Replaces jet variables; `f` returns `None` to keep a variable.
    pub fn substitute<F>(&self, f: &mut F) -> Result<Expr, ExprError>
    where
        F: FnMut(&JetVar) -> Option<Expr>,
    {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut acc = Expr::constant(c.clone());
            let mut kept = Monomial::one();
            for (atom, k) in m.factors() {
                match atom {
                    Atom::Var(v) => match f(v) {
                        Some(e) => acc = acc.mul_ref(&e.powh(k)?),
                        None => kept.merge(atom.clone(), k),
                    },
                    Atom::Apply { func, order, arg } => {
                        let arg = arg.substitute(f)?;
                        acc = acc.mul_ref(&Expr::apply(func, *order, arg).powh(k)?);
                    }
                    Atom::Pow(b) => {
                        let b = b.substitute(f)?;
                        acc = acc.mul_ref(&b.powh(k)?);
                    }
                }
            }
            out.add_assign_ref(&acc.mul_ref(&canonical(Rational::one(), kept)));
        }
        Ok(out)
    }
}

fn atom_contains(a: &Atom, v: &JetVar) -> bool {
    match a {
        Atom::Var(x) => x == v,
        Atom::Apply { arg, .. } => arg.contains(v),
        Atom::Pow(b) => b.contains(v),
    }
}

fn single_factor(m: &Monomial) -> Option<(&Atom, i32)> {
    if m.0.len() == 1 {
        m.factors().next()
    } else {
        None
    }
}

fn pow_atom(base: Expr, h: i32) -> Expr {
    Expr::term(Rational::one(), Monomial::single(Atom::Pow(Box::new(base)), h))
}

fn const_powh(c: &Rational, h: i32) -> Result<Expr, ExprError> {
    if h % 2 == 0 {
        return Ok(Expr::constant(rat_pow(c, h / 2)?));
    }
    if c.is_negative() {
        return Err(ExprError::SqrtNegative(c.to_string()));
    }
    if c.is_zero() {
        return if h > 0 {
            Ok(Expr::zero())
        } else {
            Err(ExprError::DivisionByZero)
        };
    }
    if let Some(r) = exact_sqrt(c) {
        return Ok(Expr::constant(rat_pow(&r, h)?));
    }
    // (h-1)/2 is exact because h is odd
    let pre = rat_pow(c, (h - 1) / 2)?;
    Ok(Expr::constant(pre).mul_ref(&pow_atom(Expr::constant(c.clone()), 1)))
}

fn pow_exponent_ok(base: &Expr, k: i32) -> bool {
    if base.len() >= 2 {
        k == 1 || k < 0
    } else {
        k == 1
    }
}

fn canonical(coef: Rational, mut m: Monomial) -> Expr {
    let bad: Vec<Atom> = m
        .factors()
        .filter(|(a, k)| matches!(a, Atom::Pow(b) if !pow_exponent_ok(b, *k)))
        .map(|(a, _)| a.clone())
        .collect();
    if bad.is_empty() {
        return Expr::term(coef, m);
    }
    let mut out = Expr::constant(coef);
    for atom in bad {
        let k = m.0.remove(&atom).unwrap();
        if let Atom::Pow(b) = atom {
            let p = b
                .powh(k)
                .expect("compound bases are nonzero and sign-consistent");
            out = out.mul_ref(&p);
        }
    }
    out.mul_ref(&Expr::term(Rational::one(), m))
}

enum Product {
    Simple(Monomial),
    Expanded(Expr),
}

fn monomial_product(a: &Monomial, b: &Monomial) -> Product {
    let mut m = a.clone();
    let mut compound = false;
    for (atom, k) in b.factors() {
        compound |= matches!(atom, Atom::Pow(_));
        m.merge(atom.clone(), k);
    }
    compound &= a.factors().any(|(x, _)| matches!(x, Atom::Pow(_)));
    if compound {
        Product::Expanded(canonical(Rational::one(), m))
    } else {
        Product::Simple(m)
    }
}

fn monomial_int_pow(m: &Monomial, n: i32) -> Expr {
    let scaled = Monomial(m.0.iter().map(|(a, &k)| (a.clone(), k * n)).collect());
    canonical(Rational::one(), scaled)
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        self.add_assign_ref(&rhs);
        self
    }
}

impl Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(mut self, rhs: Expr) -> Expr {
        self.add_assign_ref(&-rhs);
        self
    }
}

impl Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        out.add_assign_ref(&-rhs);
        out
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c))
                .collect(),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        self.mul_ref(&rhs)
    }
}

impl Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.mul_ref(rhs)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut out = Expr::zero();
        for e in iter {
            out.add_assign_ref(&e);
        }
        out
    }
}
