//! Precision contract, branch conventions and constants shared by every module.

use crate::error::{Error, Result};
use rug::float::Constant;
use rug::{Assign, Complex, Float, Rational};

pub type BigReal = Float;
pub type BigComplex = Complex;

pub const DEFAULT_DIGITS: u32 = 60;
pub const DEFAULT_GUARD: u32 = 15;
pub const MIN_DIGITS: u32 = 20;

/// Target precision in decimal digits plus guard digits. Plain value, no global state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    pub digits: u32,
    pub guard: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { digits: DEFAULT_DIGITS, guard: DEFAULT_GUARD }
    }
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::Domain(format!("digits must be >= {MIN_DIGITS}, got {digits}")));
        }
        Ok(PrecisionContext { digits, guard: DEFAULT_GUARD })
    }

    pub fn with_guard(self, guard: u32) -> Self {
        PrecisionContext { guard, ..self }
    }

    /// Reads `RPI_DIGITS`, falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var("RPI_DIGITS") {
            Ok(s) => {
                let d: u32 = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("RPI_DIGITS is not a positive integer: {s:?}")))?;
                Self::new(d)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn working_digits(&self) -> u32 {
        self.digits + self.guard
    }

    /// Binary precision used for every BigReal/BigComplex built under this context.
    pub fn prec(&self) -> u32 {
        (self.working_digits() as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8
    }

    pub fn real<T>(&self, v: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.prec(), v)
    }

    pub fn complex<T>(&self, v: T) -> Complex
    where
        Complex: Assign<T>,
    {
        Complex::with_val(self.prec(), v)
    }

    pub fn rational(&self, q: &Rational) -> Float {
        Float::with_val(self.prec(), q)
    }

    pub fn crational(&self, q: &Rational) -> Complex {
        Complex::with_val(self.prec(), (q, 0))
    }

    pub fn ten_pow(&self, e: i32) -> Float {
        use rug::ops::Pow;
        let ten = Float::with_val(self.prec(), 10);
        ten.pow(e)
    }

    /// 10^-(digits+guard): the truncation threshold for series.
    pub fn eps(&self) -> Float {
        self.ten_pow(-(self.working_digits() as i32))
    }

    /// 10^-(digits-loss): the accuracy claimed for results that lose `loss` digits.
    pub fn tol(&self, loss: u32) -> Float {
        self.ten_pow(-(self.digits as i32 - loss as i32))
    }
}

/// Principal square root: Re(w) > 0, or Re(w) = 0 and Im(w) >= 0. Negative reals map to +i·√|z|.
pub fn principal_sqrt(z: &Complex, ctx: &PrecisionContext) -> Complex {
    let mut w = Complex::with_val(ctx.prec(), z);
    if w.imag().is_zero() {
        // MPC follows signed zeros; -0 would put negative reals on the -i side.
        w.mut_imag().assign(0);
    }
    w.sqrt()
}

pub fn const_pi(ctx: &PrecisionContext) -> Float {
    Float::with_val(ctx.prec(), Constant::Pi)
}

pub fn nth_root_real(x: &Float, n: u32, ctx: &PrecisionContext) -> Result<Float> {
    if n == 0 {
        return Err(Error::Domain("root of order 0".into()));
    }
    if !(x.is_finite() && *x > 0) {
        return Err(Error::Domain(format!("nth_root_real needs x > 0, got {}", x.to_f64())));
    }
    Ok(Float::with_val(ctx.prec(), x).root(n))
}

pub(crate) fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// |a - b| for complex values.
pub(crate) fn cdist(a: &Complex, b: &Complex) -> Float {
    let d = Complex::with_val(a.prec().0, a - b);
    cabs(&d)
}

pub(crate) fn to_c64(z: &Complex) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.real().to_f64(), z.imag().to_f64())
}

/// Scientific-notation string with `digits` significant digits.
pub fn fmt_real(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

pub fn fmt_complex(z: &Complex, digits: usize) -> String {
    let re = fmt_real(z.real(), digits);
    let im = z.imag();
    if im.is_sign_negative() {
        let m = Float::with_val(im.prec(), -im);
        format!("{re}-{}i", fmt_real(&m, digits))
    } else {
        format!("{re}+{}i", fmt_real(im, digits))
    }
}

/// log10 of |x|, with -inf mapped to a large negative number so reports stay finite.
pub fn log10_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return -1.0e4;
    }
    let a = Float::with_val(x.prec(), x.abs_ref());
    let l = a.log10();
    l.to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c60() -> PrecisionContext {
        PrecisionContext::new(60).unwrap()
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let ctx = c60();
        let w = principal_sqrt(&ctx.complex(4), &ctx);
        assert_eq!(w, Complex::with_val(ctx.prec(), 2));
    }

    #[test]
    fn sqrt_of_negative_real_is_plus_i() {
        let ctx = c60();
        let w = principal_sqrt(&ctx.complex(-7), &ctx);
        assert!(w.real().is_zero());
        let expect = ctx.real(7).sqrt();
        assert_eq!(*w.imag(), expect);
        // signed zero imaginary part must not flip it
        let z = Complex::with_val(ctx.prec(), (-7, Float::with_val(ctx.prec(), -0.0)));
        let w2 = principal_sqrt(&z, &ctx);
        assert!(*w2.imag() > 0);
    }

    #[test]
    fn sqrt_squares_back_near_cp1_point() {
        let ctx = c60();
        let s7 = ctx.real(7).sqrt();
        let re = ctx.real(-47) / 128;
        let im = s7 * 45 / 128;
        let z = ctx.complex((&re, &im));
        let w = principal_sqrt(&z, &ctx);
        assert!(*w.real() > 0);
        let back = Complex::with_val(ctx.prec(), w.square_ref());
        assert!(cdist(&back, &z) < ctx.tol(0));
    }

    #[test]
    fn pi_matches_machin() {
        let ctx = PrecisionContext::new(30).unwrap();
        let p = ctx.prec();
        let a = Float::with_val(p, 5).recip().atan() * 16;
        let b = Float::with_val(p, 239).recip().atan() * 4;
        let machin = a - b;
        let pi = const_pi(&ctx);
        assert!(Float::with_val(p, &pi - &machin).abs() < ctx.tol(0));
        assert!(fmt_real(&pi, 30).starts_with("3.14159265358979323846264338328"));
    }

    #[test]
    fn pi_matches_gauss_legendre() {
        let ctx = PrecisionContext::new(40).unwrap();
        let p = ctx.prec();
        let mut a = Float::with_val(p, 1);
        let mut b = Float::with_val(p, 2).sqrt().recip();
        let mut t = Float::with_val(p, 0.25);
        let mut x = Float::with_val(p, 1);
        for _ in 0..10 {
            let an = Float::with_val(p, &a + &b) / 2;
            let bn = Float::with_val(p, &a * &b).sqrt();
            let d = Float::with_val(p, &a - &an);
            t -= Float::with_val(p, &x * d.square());
            x *= 2;
            a = an;
            b = bn;
        }
        let gl = Float::with_val(p, &a + &b).square() / (t * 4);
        assert!(Float::with_val(p, &gl - const_pi(&ctx)).abs() < ctx.tol(0));
    }

    #[test]
    fn pi_precision_monotone() {
        let a = const_pi(&PrecisionContext::new(20).unwrap());
        let b = const_pi(&PrecisionContext::new(40).unwrap());
        assert_eq!(fmt_real(&a, 20), fmt_real(&Float::with_val(a.prec(), &b), 20));
    }

    #[test]
    fn cp1_rhs_decimal() {
        let ctx = c60();
        let v = ctx.real(75) / (const_pi(&ctx) * 48);
        // oracle: mpmath, 75/(48*pi)
        assert!(fmt_real(&v, 30).starts_with("4.97359197162172924277761760539"));
    }

    #[test]
    fn nth_roots() {
        let ctx = PrecisionContext::new(40).unwrap();
        let r = nth_root_real(&ctx.real(8), 3, &ctx).unwrap();
        assert!(Float::with_val(ctx.prec(), &r - 2).abs() < ctx.tol(0));
        let x = ctx.real(6).sqrt() * 30 + 145;
        let r6 = nth_root_real(&x, 6, &ctx).unwrap();
        // oracle: mpmath, root(145+30*sqrt(6), 6)
        assert!(fmt_real(&r6, 30).starts_with("2.45416355479544040364575341338"));
        let back = Float::with_val(ctx.prec(), rug::ops::Pow::pow(&r6, 6u32));
        assert!(Float::with_val(ctx.prec(), &back - &x).abs() / &x < ctx.tol(0));
        for k in 1..8 {
            assert_eq!(nth_root_real(&ctx.real(1), k, &ctx).unwrap(), 1);
        }
        assert!(nth_root_real(&ctx.real(-1), 3, &ctx).is_err());
        assert!(nth_root_real(&ctx.real(0), 3, &ctx).is_err());
    }

    #[test]
    fn digits_floor() {
        assert!(PrecisionContext::new(19).is_err());
        assert!(PrecisionContext::new(20).is_ok());
    }
}
