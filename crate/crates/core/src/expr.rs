//! Small expression language for user-supplied functions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" ["+" | "-"] integer | "^" "(" ["+" | "-"] integer ")")*
//! atom    := number | variable | func "(" sum ")" | "(" sum ")"
//! func    := exp | sin | cos | sqrt
//! ```
//!
//! Numbers are decimal literals (`3`, `0.25`, `.5`) read exactly as rationals.
//! There is no implicit multiplication.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;
use core::str::FromStr;

use num_traits::One;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{Scalar, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Q),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

fn num(n: i64) -> Expr {
    Expr::Num(Q::from(n))
}

fn is_num(e: &Expr, n: i64) -> bool {
    matches!(e, Expr::Num(q) if *q == Q::from(n))
}

// Constructors that fold the trivial identities, so that derivatives of
// polynomials stay readable polynomials.
fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        (a, b) if is_num(&a, 0) => b,
        (a, b) if is_num(&b, 0) => a,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        (a, b) if is_num(&b, 0) => a,
        (a, b) if is_num(&a, 0) => neg(b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        (a, b) if is_num(&a, 0) || is_num(&b, 0) => num(0),
        (a, b) if is_num(&a, 1) => b,
        (a, b) if is_num(&b, 1) => a,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if is_num(&a, 0) => num(0),
        (a, b) if is_num(&b, 1) => a,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(-x),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => num(1),
        1 => a,
        _ => Expr::Pow(Box::new(a), n),
    }
}

impl Expr {
    /// Symbolic partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => num(0),
            Expr::Var(v) => num(i64::from(*v == var)),
            Expr::Neg(a) => neg(a.derivative(var)),
            Expr::Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Expr::Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Expr::Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.derivative(var), (**b).clone()),
                    mul((**a).clone(), b.derivative(var)),
                ),
                pow((**b).clone(), 2),
            ),
            Expr::Pow(a, n) => mul(
                mul(num(i64::from(*n)), pow((**a).clone(), n - 1)),
                a.derivative(var),
            ),
            Expr::Call(f, a) => {
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Sin => Expr::Call(Func::Cos, a.clone()),
                    Func::Cos => neg(Expr::Call(Func::Sin, a.clone())),
                    Func::Sqrt => div(num(1), mul(num(2), self.clone())),
                };
                mul(outer, a.derivative(var))
            }
        }
    }

    pub fn eval_jet<S: Scalar>(&self, args: &[Jet<S>]) -> Result<Jet<S>> {
        Ok(match self {
            Expr::Num(q) => args[0].constant_like(S::from_q(q)),
            Expr::Var(v) => args[*v].clone(),
            Expr::Neg(a) => -a.eval_jet(args)?,
            Expr::Add(a, b) => a.eval_jet(args)? + b.eval_jet(args)?,
            Expr::Sub(a, b) => a.eval_jet(args)? - b.eval_jet(args)?,
            Expr::Mul(a, b) => a.eval_jet(args)? * b.eval_jet(args)?,
            Expr::Div(a, b) => a.eval_jet(args)?.try_div(&b.eval_jet(args)?)?,
            Expr::Pow(a, n) => a.eval_jet(args)?.powi(*n)?,
            Expr::Call(f, a) => {
                let inner = a.eval_jet(args)?;
                match f {
                    Func::Exp => inner.exp()?,
                    Func::Sin => inner.sin()?,
                    Func::Cos => inner.cos()?,
                    Func::Sqrt => inner.sqrt()?,
                }
            }
        })
    }

    pub fn eval_scalar<S: Scalar>(&self, args: &[S]) -> Result<S> {
        Ok(match self {
            Expr::Num(q) => S::from_q(q),
            Expr::Var(v) => args[*v].clone(),
            Expr::Neg(a) => -a.eval_scalar(args)?,
            Expr::Add(a, b) => a.eval_scalar(args)? + b.eval_scalar(args)?,
            Expr::Sub(a, b) => a.eval_scalar(args)? - b.eval_scalar(args)?,
            Expr::Mul(a, b) => a.eval_scalar(args)? * b.eval_scalar(args)?,
            Expr::Div(a, b) => a.eval_scalar(args)?.checked_div(&b.eval_scalar(args)?)?,
            Expr::Pow(a, n) => {
                let base = a.eval_scalar(args)?;
                let p = base.powi(n.unsigned_abs());
                if *n < 0 {
                    p.recip()?
                } else {
                    p
                }
            }
            Expr::Call(f, a) => {
                let inner = a.eval_scalar(args)?;
                match f {
                    Func::Exp => inner.exp()?,
                    Func::Sin => inner.sin()?,
                    Func::Cos => inner.cos()?,
                    Func::Sqrt => inner.pow_ratio(1, 2)?,
                }
            }
        })
    }

    /// Whether the expression calls `exp`, `sin` or `cos`.
    pub fn is_transcendental(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_transcendental(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_transcendental() || b.is_transcendental()
            }
            Expr::Call(f, a) => *f != Func::Sqrt || a.is_transcendental(),
        }
    }

    /// Whether the expression is a polynomial in its variables.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => true,
            Expr::Neg(a) => a.is_polynomial(),
            Expr::Pow(a, n) => *n >= 0 && a.is_polynomial(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            Expr::Div(a, b) => a.is_polynomial() && matches!(**b, Expr::Num(_)),
            Expr::Call(..) => false,
        }
    }

    /// Binding strength used by the printer: larger binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Num(q) if !q.denom().is_one() => 2,
            Expr::Neg(_) => 3,
            Expr::Num(q) if q.signum() == core::cmp::Ordering::Less => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                f.write_str("(")?;
                e.write(f, names)?;
                f.write_str(")")
            } else {
                e.write(f, names)
            }
        };
        match self {
            Expr::Num(q) => write!(f, "{q}"),
            Expr::Var(v) => f.write_str(&names[*v]),
            Expr::Neg(a) => {
                f.write_str("-")?;
                child(f, a, 3)
            }
            Expr::Add(a, b) => {
                child(f, a, 1)?;
                f.write_str(" + ")?;
                child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                child(f, a, 1)?;
                f.write_str(" - ")?;
                child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                child(f, a, 2)?;
                f.write_str("*")?;
                child(f, b, 3)
            }
            Expr::Div(a, b) => {
                child(f, a, 2)?;
                f.write_str("/")?;
                child(f, b, 3)
            }
            Expr::Pow(a, n) => {
                child(f, a, 4)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(f, names)?;
                f.write_str(")")
            }
        }
    }
}

/// A parsed expression together with the names of its variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    expr: Arc<Expr>,
    vars: Arc<[String]>,
}

impl Expression {
    /// Parse `text` with the given ordered variable names.
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self> {
        let names: Arc<[String]> = vars.iter().map(|s| s.to_string()).collect();
        let expr = Parser::new(text, &names).parse()?;
        Ok(Expression {
            expr: Arc::new(expr),
            vars: names,
        })
    }

    pub fn from_expr(expr: Expr, vars: &[&str]) -> Self {
        Expression {
            expr: Arc::new(expr),
            vars: vars.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn derivative(&self, var: usize) -> Self {
        Expression {
            expr: Arc::new(self.expr.derivative(var)),
            vars: self.vars.clone(),
        }
    }

    /// Evaluate on jets, one per variable; all jets must share a space.
    pub fn eval_jet<S: Scalar>(&self, args: &[Jet<S>]) -> Result<Jet<S>> {
        self.check_arity(args.len())?;
        self.expr.eval_jet(args)
    }

    pub fn eval<S: Scalar>(&self, args: &[S]) -> Result<S> {
        self.check_arity(args.len())?;
        self.expr.eval_scalar(args)
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if n != self.vars.len() || n == 0 {
            return Err(Error::Argument(format!(
                "expression takes {} arguments, got {n}",
                self.vars.len()
            )));
        }
        Ok(())
    }

    pub fn is_transcendental(&self) -> bool {
        self.expr.is_transcendental()
    }

    pub fn is_polynomial(&self) -> bool {
        self.expr.is_polynomial()
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.write(f, &self.vars)
    }
}

/// A free function of the single variable `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeFunction(Expression);

impl FreeFunction {
    pub fn parse(text: &str) -> Result<Self> {
        Expression::parse(text, &["y"]).map(FreeFunction)
    }

    pub fn constant(q: Q) -> Self {
        FreeFunction(Expression::from_expr(Expr::Num(q), &["y"]))
    }

    pub fn expression(&self) -> &Expression {
        &self.0
    }

    pub fn derivative(&self) -> Self {
        FreeFunction(self.0.derivative(0))
    }

    pub fn eval_jet<S: Scalar>(&self, y: &Jet<S>) -> Result<Jet<S>> {
        self.0.eval_jet(core::slice::from_ref(y))
    }

    pub fn eval<S: Scalar>(&self, y: &S) -> Result<S> {
        self.0.eval(core::slice::from_ref(y))
    }

    pub fn is_transcendental(&self) -> bool {
        self.0.is_transcendental()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.is_polynomial()
    }
}

impl FromStr for FreeFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for FreeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, vars: &'a [String]) -> Self {
        Parser { src, pos: 0, vars }
    }

    fn parse(mut self) -> Result<Expr> {
        self.skip_ws();
        if self.pos == self.src.len() {
            return Err(self.error("empty expression"));
        }
        let e = self.sum()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(e)
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut acc = self.product()?;
        loop {
            if self.eat('+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.product()?));
            } else if self.eat('-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.product()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat('/') {
                acc = Expr::Div(Box::new(acc), Box::new(self.unary()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.atom()?;
        while self.eat('^') {
            let paren = self.eat('(');
            let n = self.integer()?;
            if paren && !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            base = Expr::Pow(Box::new(base), n);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        let negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer exponent"));
        }
        let n: i32 = self.src[start..self.pos]
            .parse()
            .map_err(|_| Error::Syntax {
                offset: start,
                message: "exponent out of range".into(),
            })?;
        Ok(if negative { -n } else { n })
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let text = &self.src[start..self.pos];
                text.parse::<Q>().map(Expr::Num).map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number '{text}'"),
                })
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
                    self.pos += self.peek().map_or(1, char::len_utf8);
                }
                let name = &self.src[start..self.pos];
                if let Some(v) = self.vars.iter().position(|v| v == name) {
                    return Ok(Expr::Var(v));
                }
                if let Some(func) = Func::from_name(name) {
                    if !self.eat('(') {
                        return Err(self.error("expected '(' after function name"));
                    }
                    let arg = self.sum()?;
                    if !self.eat(')') {
                        return Err(self.error("expected ')'"));
                    }
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                Err(Error::UnknownIdentifier {
                    name: name.into(),
                    offset: start,
                })
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;
    use alloc::vec::Vec;

    fn y_jet(order: usize, at: Q) -> Jet<Q> {
        Jet::variable(&JetSpace::new(1, order), 0, at).unwrap()
    }

    #[test]
    fn parses_examples() {
        let f = FreeFunction::parse("1 + 2*y + y^2").unwrap();
        assert!(f.is_polynomial());
        assert_eq!(f.eval(&Q::from(2)).unwrap(), Q::from(9));
        let g = FreeFunction::parse("1/(1+y^2)").unwrap();
        assert!(!g.is_polynomial());
        assert_eq!(
            FreeFunction::parse("y +* 3").unwrap_err(),
            Error::Syntax {
                offset: 3,
                message: "unexpected character".into()
            }
        );
        assert!(matches!(
            FreeFunction::parse("2*w"),
            Err(Error::UnknownIdentifier { offset: 2, .. })
        ));
        assert!(matches!(
            FreeFunction::parse("  "),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            FreeFunction::parse("y^0.5"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn precedence() {
        let f = FreeFunction::parse("-y^2").unwrap();
        assert_eq!(f.eval(&Q::from(3)).unwrap(), Q::from(-9));
        let g = FreeFunction::parse("2*-y + 6/3/2").unwrap();
        assert_eq!(g.eval(&Q::from(1)).unwrap(), Q::from(-1));
        let h = FreeFunction::parse("y^-2 + y^(+1) - 0.25").unwrap();
        assert_eq!(h.eval(&Q::from(2)).unwrap(), Q::from(2));
    }

    #[test]
    fn evaluates_on_jets() {
        let sq = FreeFunction::parse("y^2")
            .unwrap()
            .eval_jet(&y_jet(2, Q::from(3)))
            .unwrap();
        let c: Vec<Q> = sq.coefficients().map(|(_, c)| c.clone()).collect();
        assert_eq!(c, [Q::from(9), Q::from(6), Q::from(1)]);
        let one = FreeFunction::parse("1")
            .unwrap()
            .eval_jet(&y_jet(2, Q::from(5)))
            .unwrap();
        assert_eq!(*one.value(), Q::one());
        assert!(one.coefficients().skip(1).all(|(_, c)| c.is_zero()));
        let r = FreeFunction::parse("1/(1+y^2)")
            .unwrap()
            .eval_jet(&y_jet(1, Q::one()))
            .unwrap();
        assert_eq!(r.d(0).unwrap().value().clone(), Q::new(-1, 2));
    }

    #[test]
    fn symbolic_derivatives() {
        let d = FreeFunction::parse("y^3").unwrap().derivative();
        assert_eq!(d.to_string(), "3*y^2");
        assert_eq!(
            FreeFunction::parse("1").unwrap().derivative().to_string(),
            "0"
        );
        let s = FreeFunction::parse("sin(y)").unwrap().derivative();
        assert_eq!(s.eval(&Q::zero()).unwrap(), Q::one());
        assert!(s.is_transcendental());
        let r = FreeFunction::parse("sqrt(y)").unwrap().derivative();
        assert_eq!(r.eval(&Q::from(4)).unwrap(), Q::new(1, 4));
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "-(y - 1)^2",
            "(-3)^2*y",
            "y/(2*y)",
            "1/2 - -y",
            "-(1/2)^3",
            "y - (y - 1)",
        ] {
            let f = FreeFunction::parse(text).unwrap();
            let g = FreeFunction::parse(&f.to_string()).unwrap();
            for k in -3..4 {
                let at = Q::new(k, 3);
                assert_eq!(f.eval(&at).ok(), g.eval(&at).ok(), "{text} -> {f}");
            }
        }
    }

    #[test]
    fn multivariate_expressions() {
        let e = Expression::parse("x*z + p^2", &["x", "y", "z", "p"]).unwrap();
        let args = [Q::from(1), Q::from(0), Q::from(2), Q::from(3)];
        assert_eq!(e.eval(&args).unwrap(), Q::from(11));
        assert_eq!(e.derivative(3).eval(&args).unwrap(), Q::from(6));
        assert!(e.eval(&args[..2]).is_err());
    }
}
