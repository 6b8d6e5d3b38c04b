//! Expression grammar for right-hand sides and table cells.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? INT)?
//! atom   := INT | FUNC '(' expr ')' | '(' expr ')'
//! FUNC   := sqrt | cbrt | root6
//! ```
//!
//! Registry right-hand sides carry an implicit trailing `/pi`.

use crate::algebra::surd::ComplexSurd;
use crate::error::{Error, Result};
use crate::numerics::{const_pi, nth_root_real, principal_sqrt, PrecisionContext};
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Integer),
    Sqrt(Box<Expr>),
    Cbrt(Box<Expr>),
    Root6(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(Integer),
    Ident(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let txt: String = cs[st..i].iter().collect();
            out.push(Tok::Int(txt.parse::<Integer>().map_err(|e| Error::Parse(e.to_string()))?));
        } else if c.is_ascii_alphabetic() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' in \"{s}\"")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_sym(&self, c: char) -> bool {
        matches!(self.toks.get(self.pos), Some(Tok::Sym(x)) if *x == c)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{c}' at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.peek_sym('+') {
                self.pos += 1;
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.peek_sym('-') {
                self.pos += 1;
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.peek_sym('*') {
                self.pos += 1;
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek_sym('/') {
                self.pos += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_sym('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.peek_sym('^') {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek_sym('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.toks.get(self.pos) {
            Some(Tok::Int(n)) => {
                let k = n.to_i32().filter(|k| *k <= 64).ok_or_else(|| Error::Parse("exponent too large".into()))?;
                self.pos += 1;
                Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }))
            }
            _ => Err(Error::Parse("expected integer exponent".into())),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.expect('(')?;
                let inner = Box::new(self.expr()?);
                self.expect(')')?;
                match name.as_str() {
                    "sqrt" => Ok(Expr::Sqrt(inner)),
                    "cbrt" => Ok(Expr::Cbrt(inner)),
                    "root6" => Ok(Expr::Root6(inner)),
                    _ => Err(Error::Parse(format!("unknown function {name}"))),
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr> {
        let toks = lex(s)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in \"{s}\"")));
        }
        Ok(e)
    }

    pub fn num(n: i64) -> Expr {
        Expr::Num(Integer::from(n))
    }

    /// Numeric value; sqrt is principal, cbrt and root6 take the real root of a positive argument.
    pub fn eval(&self, ctx: &PrecisionContext) -> Result<Complex> {
        let p = ctx.prec();
        Ok(match self {
            Expr::Num(n) => Complex::with_val(p, n),
            Expr::Sqrt(a) => principal_sqrt(&a.eval(ctx)?, ctx),
            Expr::Cbrt(a) => Complex::with_val(p, nth_root_real(&real_positive(&a.eval(ctx)?, ctx)?, 3, ctx)?),
            Expr::Root6(a) => Complex::with_val(p, nth_root_real(&real_positive(&a.eval(ctx)?, ctx)?, 6, ctx)?),
            Expr::Neg(a) => -a.eval(ctx)?,
            Expr::Add(a, b) => a.eval(ctx)? + b.eval(ctx)?,
            Expr::Sub(a, b) => a.eval(ctx)? - b.eval(ctx)?,
            Expr::Mul(a, b) => a.eval(ctx)? * b.eval(ctx)?,
            Expr::Div(a, b) => {
                let d = b.eval(ctx)?;
                if d.is_zero() {
                    return Err(Error::Domain("division by zero in expression".into()));
                }
                a.eval(ctx)? / d
            }
            Expr::Pow(a, k) => {
                let v = a.eval(ctx)?;
                if *k < 0 && v.is_zero() {
                    return Err(Error::Domain("zero to a negative power".into()));
                }
                rug::ops::Pow::pow(v, *k)
            }
        })
    }

    /// Exact value when the expression only uses square roots of rationals.
    pub fn to_surd(&self) -> Option<ComplexSurd> {
        Some(match self {
            Expr::Num(n) => ComplexSurd::rational(Rational::from(n.clone())),
            Expr::Sqrt(a) => {
                let q = a.to_surd()?.as_rational()?;
                ComplexSurd::sqrt_rational(&q).ok()?
            }
            Expr::Cbrt(_) | Expr::Root6(_) => return None,
            Expr::Neg(a) => a.to_surd()?.neg(),
            Expr::Add(a, b) => a.to_surd()?.add(&b.to_surd()?),
            Expr::Sub(a, b) => a.to_surd()?.sub(&b.to_surd()?),
            Expr::Mul(a, b) => a.to_surd()?.mul(&b.to_surd()?),
            Expr::Div(a, b) => a.to_surd()?.mul(&b.to_surd()?.inverse()?),
            Expr::Pow(a, k) => {
                let base = a.to_surd()?;
                let base = if *k < 0 { base.inverse()? } else { base };
                let mut acc = ComplexSurd::rational(Rational::from(1));
                for _ in 0..k.unsigned_abs() {
                    acc = acc.mul(&base);
                }
                acc
            }
        })
    }

    fn prec_level(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn real_positive(z: &Complex, ctx: &PrecisionContext) -> Result<Float> {
    let scale = Float::with_val(ctx.prec(), z.abs_ref()) * ctx.tol(5);
    if Float::with_val(ctx.prec(), z.imag().abs_ref()) > scale {
        return Err(Error::Domain("real root of a non-real argument".into()));
    }
    Ok(z.real().clone())
}

fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Cbrt(a) => write!(f, "cbrt({a})"),
            Expr::Root6(a) => write!(f, "root6({a})"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                paren(f, a, a.prec_level() < 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                paren(f, a, a.prec_level() < 1)?;
                write!(f, "{}", if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                paren(f, b, b.prec_level() <= 1)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                paren(f, a, a.prec_level() < 2)?;
                write!(f, "{}", if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                paren(f, b, b.prec_level() <= 2)
            }
            Expr::Pow(a, k) => {
                paren(f, a, a.prec_level() < 5)?;
                write!(f, "^{k}")
            }
        }
    }
}

/// A registry right-hand side: `expr / pi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhsExpr {
    pub expr: Expr,
}

impl RhsExpr {
    pub fn parse(s: &str) -> Result<RhsExpr> {
        Ok(RhsExpr { expr: Expr::parse(s)? })
    }

    pub fn to_surd(&self) -> Option<ComplexSurd> {
        self.expr.to_surd()
    }

    /// Numeric value including the 1/pi factor.
    pub fn eval(&self, ctx: &PrecisionContext) -> Result<Float> {
        let v = self.expr.eval(ctx)?;
        let re = real_positive(&v, ctx)?;
        if re <= 0 {
            return Err(Error::Domain("right-hand side is not positive".into()));
        }
        Ok(re / const_pi(ctx))
    }
}

pub fn rhs_eval(e: &RhsExpr, ctx: &PrecisionContext) -> Result<Float> {
    e.eval(ctx)
}

impl fmt::Display for RhsExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

impl Serialize for RhsExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RhsExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        RhsExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}
