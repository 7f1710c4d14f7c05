//! Unnormalized expression trees and the text grammar.

use num::{BigInt, Zero};

use super::eval::{Env, Number};
use super::poly::Expr;
use super::{ExprError, JetVar, Rational, VarKind, DEFAULT_COEFFICIENT_BITS};

#[derive(Clone, Debug, PartialEq)]
pub enum Tree {
    Num(Rational),
    Var(JetVar),
    Add(Vec<Tree>),
    Mul(Vec<Tree>),
    Neg(Box<Tree>),
    Div(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, i32),
    /// `func` differentiated `order` times; `sqrt` is built in.
    Call { func: String, order: u32, arg: Box<Tree> },
}

impl Tree {
    pub fn normalize(&self) -> Result<Expr, ExprError> {
        self.normalize_with(DEFAULT_COEFFICIENT_BITS)
    }

    pub fn normalize_with(&self, max_bits: u64) -> Result<Expr, ExprError> {
        let e = match self {
            Tree::Num(r) => Expr::constant(r.clone()),
            Tree::Var(v) => Expr::var(v.clone()),
            Tree::Add(xs) => {
                let mut acc = Expr::zero();
                for x in xs {
                    acc = acc + x.normalize_with(max_bits)?;
                }
                acc
            }
            Tree::Mul(xs) => {
                let mut acc = Expr::one();
                for x in xs {
                    acc = acc * x.normalize_with(max_bits)?;
                    check_bits(&acc, max_bits)?;
                }
                acc
            }
            Tree::Neg(x) => -x.normalize_with(max_bits)?,
            Tree::Div(a, b) => a.normalize_with(max_bits)? * b.normalize_with(max_bits)?.recip()?,
            Tree::Pow(x, n) => x.normalize_with(max_bits)?.pow(*n)?,
            Tree::Call { func, order, arg } => {
                let a = arg.normalize_with(max_bits)?;
                if func == "sqrt" {
                    if *order != 0 {
                        return Err(ExprError::UnknownFunction(format!("{func} of order {order}")));
                    }
                    a.sqrt()?
                } else {
                    Expr::apply(func, *order, a)
                }
            }
        };
        check_bits(&e, max_bits)?;
        Ok(e)
    }

    /// Direct recursive evaluation without normalizing.
    pub fn evaluate(&self, env: &dyn Env) -> Result<Number, ExprError> {
        Ok(match self {
            Tree::Num(r) => Number::Exact(r.clone()),
            Tree::Var(v) => env.value(v).ok_or_else(|| ExprError::Unbound(v.to_string()))?,
            Tree::Add(xs) => {
                let mut acc = Number::Exact(Rational::zero());
                for x in xs {
                    acc = acc.add(&x.evaluate(env)?);
                }
                acc
            }
            Tree::Mul(xs) => {
                let mut acc = Number::from(1);
                for x in xs {
                    acc = acc.mul(&x.evaluate(env)?);
                }
                acc
            }
            Tree::Neg(x) => x.evaluate(env)?.neg(),
            Tree::Div(a, b) => a.evaluate(env)?.mul(&b.evaluate(env)?.recip()?),
            Tree::Pow(x, n) => x.evaluate(env)?.powh(2 * n)?,
            Tree::Call { func, order, arg } => {
                let a = arg.evaluate(env)?;
                if func == "sqrt" && *order == 0 {
                    a.powh(1)?
                } else {
                    env.call(func, *order, &a)
                        .ok_or_else(|| ExprError::UnknownFunction(func.clone()))?
                }
            }
        })
    }
}

fn check_bits(e: &Expr, max_bits: u64) -> Result<(), ExprError> {
    if e.max_coefficient_bits() > max_bits {
        Err(ExprError::ResourceLimit(max_bits))
    } else {
        Ok(())
    }
}

/// Resolves identifiers met while parsing.
pub trait SymbolTable {
    /// Coordinate whose derivatives are written as primes.
    fn transversal(&self) -> usize {
        0
    }

    fn var_kind(&self, name: &str, component: &[u8]) -> Result<VarKind, String>;

    fn is_function(&self, name: &str) -> bool;
}

/// Accepts every identifier as a field and every call as a function.
pub struct AnySymbol;

impl SymbolTable for AnySymbol {
    fn var_kind(&self, _: &str, _: &[u8]) -> Result<VarKind, String> {
        Ok(VarKind::Field)
    }

    fn is_function(&self, _: &str) -> bool {
        true
    }
}

pub fn parse_expr(text: &str, symbols: &dyn SymbolTable) -> Result<Tree, ExprError> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
        symbols,
    };
    let t = p.expr()?;
    p.skip_ws();
    if p.pos < p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(t)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    symbols: &'a dyn SymbolTable,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Tree, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Tree::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Tree::Add(terms) })
    }

    fn term(&mut self) -> Result<Tree, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                acc = match acc {
                    Tree::Mul(mut xs) => {
                        xs.push(rhs);
                        Tree::Mul(xs)
                    }
                    other => Tree::Mul(vec![other, rhs]),
                };
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                acc = Tree::Div(Box::new(acc), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Tree, ExprError> {
        if self.eat(b'-') {
            return Ok(Tree::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let paren = self.eat(b'(');
            let neg = self.eat(b'-');
            let n = self.integer()?;
            if paren {
                self.expect(b')')?;
            }
            let n = i32::try_from(n).map_err(|_| self.err("exponent too large"))?;
            return Ok(Tree::Pow(Box::new(base), if neg { -n } else { n }));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    fn number(&mut self) -> Result<Tree, ExprError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let mut digits = String::from_utf8(self.s[start..self.pos].to_vec()).unwrap();
        let mut denom = BigInt::from(1);
        if self.pos < self.s.len() && self.s[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                digits.push(self.s[self.pos] as char);
                denom *= 10;
                self.pos += 1;
            }
        }
        let numer: BigInt = digits.parse().map_err(|_| self.err("bad number"))?;
        Ok(Tree::Num(Rational::new(numer, denom)))
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphabetic() || self.s[self.pos] == b'_') {
            self.pos += 1;
            while self.pos < self.s.len()
                && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
            {
                self.pos += 1;
            }
            Some(String::from_utf8(self.s[start..self.pos].to_vec()).unwrap())
        } else {
            None
        }
    }

    fn primes(&mut self) -> usize {
        let mut n = 0;
        while self.pos < self.s.len() && self.s[self.pos] == b'\'' {
            self.pos += 1;
            n += 1;
        }
        n
    }

    /// Consumes `d[i]` when it is a derivative prefix.
    fn deriv_prefix(&mut self) -> Option<u8> {
        let rest = &self.s[self.pos..];
        if rest.len() < 4 || rest[0] != b'd' || rest[1] != b'[' {
            return None;
        }
        let close = rest.iter().position(|&c| c == b']')?;
        let inner = std::str::from_utf8(&rest[2..close]).ok()?;
        let idx: u8 = inner.trim().parse().ok()?;
        let next = rest.get(close + 1)?;
        if next.is_ascii_alphabetic() || *next == b'_' {
            self.pos += close + 1;
            Some(idx)
        } else {
            None
        }
    }

    fn atom(&mut self) -> Result<Tree, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.expr()?;
                self.expect(b')')?;
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => self.symbol(),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn symbol(&mut self) -> Result<Tree, ExprError> {
        let start = self.pos;
        let mut derivs = Vec::new();
        while let Some(i) = self.deriv_prefix() {
            derivs.push(i);
        }
        let name = self.ident().ok_or_else(|| self.err("expected symbol"))?;
        let mut component = Vec::new();
        if self.pos < self.s.len() && self.s[self.pos] == b'[' {
            self.pos += 1;
            loop {
                let n = self.integer()?;
                component.push(u8::try_from(n).map_err(|_| self.err("index too large"))?);
                if self.eat(b',') {
                    continue;
                }
                self.expect(b']')?;
                break;
            }
        }
        let primes = self.primes();
        if derivs.is_empty() && component.is_empty() && self.peek() == Some(b'(') {
            if name != "sqrt" && !self.symbols.is_function(&name) {
                self.pos = start;
                return Err(self.err(&format!("undeclared function `{name}`")));
            }
            self.pos += 1;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Tree::Call {
                func: name,
                order: primes as u32,
                arg: Box::new(arg),
            });
        }
        let kind = self.symbols.var_kind(&name, &component).map_err(|msg| ExprError::Parse {
            pos: start,
            msg,
        })?;
        let t = self.symbols.transversal() as u8;
        let mut v = JetVar {
            field: name,
            component,
            deriv: Vec::new(),
            kind,
        };
        for d in derivs {
            v = v.with_deriv(d);
        }
        for _ in 0..primes {
            v = v.with_deriv(t);
        }
        Ok(Tree::Var(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MapEnv;

    fn parse(s: &str) -> Expr {
        parse_expr(s, &AnySymbol).unwrap().normalize().unwrap()
    }

    #[test]
    fn jet_syntax() {
        let t = parse_expr("d[1]A[2]' + q''", &AnySymbol).unwrap();
        let Tree::Add(xs) = t else { panic!() };
        assert_eq!(
            xs[0],
            Tree::Var(JetVar::field("A", &[2]).with_derivs(&[0, 1]))
        );
        assert_eq!(xs[1], Tree::Var(JetVar::field("q", &[]).with_derivs(&[0, 0])));
    }

    #[test]
    fn field_named_d_is_not_a_prefix() {
        let t = parse_expr("d[1] * x", &AnySymbol).unwrap();
        assert_eq!(
            t,
            Tree::Mul(vec![
                Tree::Var(JetVar::field("d", &[1])),
                Tree::Var(JetVar::field("x", &[]))
            ])
        );
    }

    #[test]
    fn arithmetic_normalizes() {
        assert!(parse("(q + q) - 2*q").is_zero());
        assert_eq!(parse("1/2*sqrt(x)^2"), parse("x/2"));
        assert_eq!(parse("0.25"), parse("1/4"));
        assert_eq!(parse("x^-2 * x^(2)"), Expr::one());
        assert_eq!(parse("-x^2"), -parse("x*x"));
    }

    #[test]
    fn opaque_derivative_calls() {
        let t = parse_expr("V''(q)", &AnySymbol).unwrap();
        assert!(matches!(t, Tree::Call { order: 2, .. }));
    }

    #[test]
    fn parse_errors_have_positions() {
        match parse_expr("q + * 2", &AnySymbol) {
            Err(ExprError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("(q", &AnySymbol).is_err());
        assert!(parse_expr("q q", &AnySymbol).is_err());
    }

    #[test]
    fn coefficient_limit() {
        let t = parse_expr("(3*x + 1)^60", &AnySymbol).unwrap();
        assert_eq!(t.normalize_with(64), Err(ExprError::ResourceLimit(64)));
    }

    #[test]
    fn direct_and_normalized_evaluation_agree() {
        let t = parse_expr("(x + 2*y)^3 / (1 + x*x) - sqrt(x*x + y*y)", &AnySymbol).unwrap();
        let e = t.normalize().unwrap();
        let mut env = MapEnv::new();
        env.bind(JetVar::field("x", &[]), Number::Exact(Rational::new(3.into(), 7.into())))
            .bind(JetVar::field("y", &[]), (-2).into());
        let a = t.evaluate(&env).unwrap().to_f64();
        let b = crate::expr::evaluate(&e, &env).unwrap().to_f64();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }
}
