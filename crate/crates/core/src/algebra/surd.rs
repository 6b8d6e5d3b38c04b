use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;
use rug::{Complex, Float, Integer, Rational};
use std::collections::BTreeMap;
use std::fmt;

/// Split n > 0 as s^2 * k with k square-free.
pub fn squarefree_split(n: &Integer) -> (Integer, Integer) {
    assert!(*n > 0, "squarefree_split needs n > 0");
    let mut k = n.clone();
    let mut s = Integer::from(1);
    let mut p = Integer::from(2);
    loop {
        let pp = Integer::from(&p * &p);
        if pp > k {
            break;
        }
        while k.is_divisible(&pp) {
            k /= &pp;
            s *= &p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (s, k)
}

pub fn squarefree_part(n: u64) -> u64 {
    let (_, k) = squarefree_split(&Integer::from(n));
    k.to_u64().unwrap()
}

pub fn is_squarefree(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    let (s, _) = squarefree_split(&Integer::from(n.unsigned_abs()));
    s == 1
}

/// Finite sum of rational multiples of sqrt(d), d positive square-free (d = 1 is the rational part).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RealSurd {
    terms: BTreeMap<u64, Rational>,
}

impl RealSurd {
    pub fn zero() -> Self {
        RealSurd::default()
    }

    pub fn rational(q: Rational) -> Self {
        Self::term(q, 1)
    }

    /// q * sqrt(d) for square-free d >= 1.
    pub fn term(q: Rational, d: u64) -> Self {
        let mut s = RealSurd::zero();
        s.add_term(q, d);
        s
    }

    fn add_term(&mut self, q: Rational, d: u64) {
        if q == 0 {
            return;
        }
        let e = self.terms.entry(d).or_default();
        *e += q;
        if *e == 0 {
            self.terms.remove(&d);
        }
    }

    /// sqrt(q) for rational q >= 0 as a single-term surd.
    pub fn sqrt_rational(q: &Rational) -> Result<Self> {
        if *q < 0 {
            return Err(Error::Domain("sqrt of negative rational in RealSurd".into()));
        }
        if *q == 0 {
            return Ok(Self::zero());
        }
        let nd = Integer::from(q.numer() * q.denom());
        let (s, k) = squarefree_split(&nd);
        let coef = Rational::from((s, q.denom().clone()));
        Ok(Self::term(coef, k.to_u64().ok_or_else(|| Error::Domain("radicand too large".into()))?))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::new()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn coefficient(&self, d: u64) -> Rational {
        self.terms.get(&d).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u64, &Rational)> {
        self.terms.iter()
    }

    /// Square-free radicands present (including 1 when there is a rational part).
    pub fn radicands(&self) -> Vec<u64> {
        self.terms.keys().copied().collect()
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let mut out = RealSurd::zero();
        for (d, c) in &self.terms {
            out.add_term(Rational::from(c * q), *d);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in &o.terms {
            out.add_term(c.clone(), *d);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rational::from(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = RealSurd::zero();
        for (d1, c1) in &self.terms {
            for (d2, c2) in &o.terms {
                let prod = Integer::from(*d1) * *d2;
                let (s, k) = squarefree_split(&prod);
                let c = Rational::from(c1 * c2) * s;
                out.add_term(c, k.to_u64().unwrap());
            }
        }
        out
    }

    pub fn eval(&self, ctx: &PrecisionContext) -> Float {
        let p = ctx.prec();
        let mut acc = Float::with_val(p, 0);
        for (d, c) in &self.terms {
            let r = if *d == 1 { Float::with_val(p, 1) } else { Float::with_val(p, *d).sqrt() };
            acc += r * Float::with_val(p, c);
        }
        acc
    }

    /// Largest denominator among the coefficients.
    pub fn max_denominator(&self) -> Integer {
        self.terms.values().map(|c| c.denom().clone()).max().unwrap_or_else(|| Integer::from(1))
    }
}

impl fmt::Display for RealSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in &self.terms {
            let neg = *c < 0;
            let a = Rational::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            if *d == 1 {
                write!(f, "{a}")?;
            } else if a == 1 {
                write!(f, "sqrt({d})")?;
            } else {
                write!(f, "{a}*sqrt({d})")?;
            }
        }
        Ok(())
    }
}

/// re + i*im with both parts real surds.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ComplexSurd {
    pub re: RealSurd,
    pub im: RealSurd,
}

impl ComplexSurd {
    pub fn new(re: RealSurd, im: RealSurd) -> Self {
        ComplexSurd { re, im }
    }

    pub fn real(re: RealSurd) -> Self {
        ComplexSurd { re, im: RealSurd::zero() }
    }

    pub fn rational(q: Rational) -> Self {
        Self::real(RealSurd::rational(q))
    }

    /// Principal sqrt of a rational: i*sqrt(|q|) for q < 0.
    pub fn sqrt_rational(q: &Rational) -> Result<Self> {
        if *q >= 0 {
            Ok(Self::real(RealSurd::sqrt_rational(q)?))
        } else {
            let a = Rational::from(-q);
            Ok(ComplexSurd { re: RealSurd::zero(), im: RealSurd::sqrt_rational(&a)? })
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.im.is_zero() {
            self.re.as_rational()
        } else {
            None
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexSurd { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexSurd { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> Self {
        ComplexSurd { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        ComplexSurd { re, im }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        ComplexSurd { re: self.re.scale(q), im: self.im.scale(q) }
    }

    pub fn conj(&self) -> Self {
        ComplexSurd { re: self.re.clone(), im: self.im.neg() }
    }

    /// Multiplicative inverse when the value lies in a field we can rationalize cheaply:
    /// rational, or a single quadratic field a + b*sqrt(d) with d possibly negative.
    pub fn inverse(&self) -> Option<Self> {
        if let Some(q) = self.as_rational() {
            if q == 0 {
                return None;
            }
            return Some(Self::rational(Rational::from(q.recip_ref())));
        }
        let qs = QuadSurd::from_complex_surd(self)?;
        let n = qs.norm();
        if n == 0 {
            return None;
        }
        let c = qs.conj();
        let inv = QuadSurd { a: Rational::from(&c.a / &n), b: Rational::from(&c.b / &n), d: c.d };
        Some(inv.to_complex_surd())
    }

    pub fn eval(&self, ctx: &PrecisionContext) -> Complex {
        Complex::with_val(ctx.prec(), (self.re.eval(ctx), self.im.eval(ctx)))
    }

    /// Equality up to adding an integer to the real part.
    pub fn eq_mod_integer_re(&self, o: &Self) -> bool {
        if self.im != o.im {
            return false;
        }
        let diff = self.re.sub(&o.re);
        match diff.as_rational() {
            Some(q) => *q.denom() == 1,
            None => false,
        }
    }
}

impl fmt::Display for ComplexSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "({})*i", self.im),
            (false, false) => write!(f, "{}+({})*i", self.re, self.im),
        }
    }
}

/// a + b*sqrt(d) with d square-free (negative allowed). d = 1 forces b = 0, and b = 0 forces d = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    pub a: Rational,
    pub b: Rational,
    pub d: i64,
}

impl QuadSurd {
    pub fn new(a: Rational, b: Rational, d: i64) -> Result<Self> {
        if !is_squarefree(d) {
            return Err(Error::Domain(format!("d = {d} is not square-free")));
        }
        if d == 1 {
            let s = Rational::from(&a + &b);
            return Ok(QuadSurd { a: s, b: Rational::new(), d: 1 });
        }
        if b == 0 {
            return Ok(QuadSurd::rational(a));
        }
        Ok(QuadSurd { a, b, d })
    }

    pub fn rational(a: Rational) -> Self {
        QuadSurd { a, b: Rational::new(), d: 1 }
    }

    fn check_field(&self, o: &Self) -> Result<i64> {
        if self.b == 0 {
            return Ok(o.d);
        }
        if o.b == 0 || self.d == o.d {
            return Ok(self.d);
        }
        Err(Error::Domain(format!("mixed fields sqrt({}) and sqrt({})", self.d, o.d)))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let d = self.check_field(o)?;
        Self::new(Rational::from(&self.a + &o.a), Rational::from(&self.b + &o.b), d)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        let d = self.check_field(o)?;
        Self::new(Rational::from(&self.a - &o.a), Rational::from(&self.b - &o.b), d)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let d = self.check_field(o)?;
        let a = Rational::from(&self.a * &o.a) + Rational::from(&self.b * &o.b) * d;
        let b = Rational::from(&self.a * &o.b) + Rational::from(&self.b * &o.a);
        Self::new(a, b, d)
    }

    pub fn conj(&self) -> Self {
        QuadSurd { a: self.a.clone(), b: Rational::from(-&self.b), d: self.d }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0 {
            return Err(Error::Domain("inverse of zero".into()));
        }
        Self::new(Rational::from(&self.a / &n), -Rational::from(&self.b / &n), self.d)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.mul(&o.inverse()?)
    }

    pub fn powu(&self, n: u32) -> Result<Self> {
        let mut out = QuadSurd::rational(Rational::from(1));
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// a^2 - d b^2.
    pub fn norm(&self) -> Rational {
        Rational::from(self.a.square_ref()) - Rational::from(self.b.square_ref()) * self.d
    }

    pub fn eval(&self, ctx: &PrecisionContext) -> Complex {
        let p = ctx.prec();
        let s = crate::numerics::principal_sqrt(&Complex::with_val(p, self.d), ctx);
        s * Float::with_val(p, &self.b) + Float::with_val(p, &self.a)
    }

    pub fn to_complex_surd(&self) -> ComplexSurd {
        let a = ComplexSurd::rational(self.a.clone());
        if self.b == 0 {
            return a;
        }
        let r = ComplexSurd::sqrt_rational(&Rational::from(self.d)).unwrap();
        a.add(&r.scale(&self.b))
    }

    /// Inverse of to_complex_surd when the value is a + b*sqrt(d) for a single d.
    pub fn from_complex_surd(z: &ComplexSurd) -> Option<Self> {
        let re_q = z.re.as_rational();
        let im_q = z.im.as_rational();
        match (re_q, im_q) {
            (Some(a), Some(b)) if b == 0 => Some(QuadSurd::rational(a)),
            (Some(a), Some(b)) => Some(QuadSurd { a, b, d: -1 }),
            (Some(a), None) => {
                // a + i*c*sqrt(k) -> d = -k
                let terms: Vec<_> = z.im.terms().collect();
                if terms.len() == 1 {
                    let (k, c) = terms[0];
                    Some(QuadSurd { a, b: c.clone(), d: -(*k as i64) })
                } else {
                    None
                }
            }
            (None, Some(b)) if b == 0 => {
                let terms: Vec<_> = z.re.terms().collect();
                let a = z.re.coefficient(1);
                let irr: Vec<_> = terms.into_iter().filter(|(k, _)| **k != 1).collect();
                if irr.len() == 1 {
                    Some(QuadSurd { a, b: irr[0].1.clone(), d: *irr[0].0 as i64 })
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Parses "a+b*sqrt(d)" as produced by Display.
    pub fn parse(s: &str) -> Result<Self> {
        let e = crate::algebra::expr::RhsExpr::parse(s)?;
        let z = e.to_surd().ok_or_else(|| Error::Parse(format!("not a quadratic surd: {s}")))?;
        Self::from_complex_surd(&z).ok_or_else(|| Error::Parse(format!("not in a single quadratic field: {s}")))
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 0 || self.d == 1 {
            return write!(f, "{}", self.a);
        }
        if self.a == 0 {
            return write!(f, "{}*sqrt({})", self.b, self.d);
        }
        if self.b < 0 {
            write!(f, "{}-{}*sqrt({})", self.a, Rational::from(-&self.b), self.d)
        } else {
            write!(f, "{}+{}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn squarefree() {
        assert_eq!(squarefree_part(140), 35);
        assert_eq!(squarefree_part(168), 42);
        assert!(is_squarefree(-7));
        assert!(!is_squarefree(12));
    }

    #[test]
    fn display_round_trips() {
        for (a, b) in [(q(0, 1), q(-3, 32)), (q(0, 1), q(5, 1)), (q(1, 4), q(-1, 84)), (q(-2, 3), q(7, 2))] {
            let s = QuadSurd::new(a, b, -7).unwrap();
            assert_eq!(QuadSurd::parse(&s.to_string()).unwrap(), s, "{s}");
        }
        assert_eq!(QuadSurd::new(q(0, 1), q(-3, 32), 7).unwrap().to_string(), "-3/32*sqrt(7)");
    }

    #[test]
    fn quadsurd_norm_and_conj() {
        let s = QuadSurd::new(q(31, 32), q(-3, 32), -7).unwrap();
        assert_eq!(s.norm(), 1);
        let p = s.mul(&s.conj()).unwrap();
        assert_eq!(p, QuadSurd::rational(q(1, 1)));
    }

    #[test]
    fn b_entry_evaluates() {
        let ctx = PrecisionContext::new(40).unwrap();
        let s = QuadSurd::new(q(-1, 4), q(-1, 84), -7).unwrap();
        let v = s.eval(&ctx);
        assert!((v.real().to_f64() + 0.25).abs() < 1e-15);
        assert!((v.imag().to_f64() + 0.031497039417435602).abs() < 1e-15);
        assert_eq!(QuadSurd::new(q(0, 1), q(0, 1), 5).unwrap().eval(&ctx), Complex::with_val(ctx.prec(), 0));
    }

    #[test]
    fn display_roundtrip() {
        let s = QuadSurd::new(q(127, 7), q(48, 7), 7).unwrap();
        assert_eq!(s.to_string(), "127/7+48/7*sqrt(7)");
        assert_eq!(QuadSurd::parse(&s.to_string()).unwrap(), s);
        let t = QuadSurd::new(q(-1, 4), q(-1, 84), -7).unwrap();
        assert_eq!(QuadSurd::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn biquadratic_product() {
        // sqrt(14) * sqrt(35) = 7 sqrt(10)
        let a = RealSurd::term(q(1, 1), 14);
        let b = RealSurd::term(q(1, 1), 35);
        assert_eq!(a.mul(&b), RealSurd::term(q(7, 1), 10));
        let r = RealSurd::sqrt_rational(&q(140, 1)).unwrap();
        assert_eq!(r, RealSurd::term(q(2, 1), 35));
    }

    #[test]
    fn mod_integer_eq() {
        let a = ComplexSurd::new(RealSurd::rational(q(-1, 2)), RealSurd::term(q(1, 2), 15));
        let b = ComplexSurd::new(RealSurd::rational(q(1, 2)), RealSurd::term(q(1, 2), 15));
        assert!(a.eq_mod_integer_re(&b));
        assert_ne!(a, b);
    }
}
