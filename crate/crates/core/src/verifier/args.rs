//! The algebraic arguments z(t;x), f(t;x), the prefactor h(t;x) and their t-derivatives.

use crate::error::{Error, Result};
use crate::numerics::{principal_sqrt, PrecisionContext};
use crate::series::SeriesFamily;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

struct ZParts {
    t: Complex,
    x: Complex,
    s: Complex,
    r: Complex,
}

fn z_parts(t: &Rational, x: &Rational, ctx: &PrecisionContext) -> ZParts {
    let p = ctx.prec();
    let tc = ctx.crational(t);
    let xc = ctx.crational(x);
    let r = Complex::with_val(p, &xc * Complex::with_val(p, &xc - 4u32));
    let rad = Complex::with_val(p, &r * Complex::with_val(p, 1u32 - Complex::with_val(p, &tc * 64u32)));
    let s = principal_sqrt(&rad, ctx);
    ZParts { t: tc, x: xc, s, r }
}

fn z_denominator(zp: &ZParts, sign: Sign, ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    let base = Complex::with_val(p, &zp.t * &zp.x) * 32u32 - &zp.x + 2u32;
    match sign {
        Sign::Plus => base + &zp.s,
        Sign::Minus => base - &zp.s,
    }
}

/// z = 128t / (32tx - x + 2 +- sqrt(x(x-4)(1-64t))).
pub fn compute_z(sign: Sign, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Complex> {
    let zp = z_parts(t, x, ctx);
    let d = z_denominator(&zp, sign, ctx);
    if d.is_zero() {
        return Err(Error::Degenerate(format!("z denominator vanishes at t = {t}, x = {x}")));
    }
    Ok(Complex::with_val(ctx.prec(), &zp.t * 128u32) / d)
}

pub fn compute_z_pm(t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<(Complex, Complex)> {
    Ok((compute_z(Sign::Plus, t, x, ctx)?, compute_z(Sign::Minus, t, x, ctx)?))
}

/// dz/dt = 128 (D - t D') / D^2 with D' = 32x -+ 32 x(x-4)/S.
pub fn compute_z_prime(sign: Sign, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    let zp = z_parts(t, x, ctx);
    let d = z_denominator(&zp, sign, ctx);
    if d.is_zero() {
        return Err(Error::Degenerate(format!("z denominator vanishes at t = {t}, x = {x}")));
    }
    let mut dp = Complex::with_val(p, &zp.x * 32u32);
    if !zp.s.is_zero() {
        let corr = Complex::with_val(p, &zp.r * 32u32) / &zp.s;
        match sign {
            Sign::Plus => dp -= corr,
            Sign::Minus => dp += corr,
        }
    }
    let num = Complex::with_val(p, &d - Complex::with_val(p, &zp.t * &dp)) * 128u32;
    Ok(num / Complex::with_val(p, d.square_ref()))
}

struct FParts {
    t: Complex,
    x: Complex,
    v: Complex,
    w: Complex,
    dv: Complex,
}

fn f_parts(t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<FParts> {
    let p = ctx.prec();
    let tc = ctx.crational(t);
    let xc = ctx.crational(x);
    let one = Complex::with_val(p, 1u32);
    let u = Complex::with_val(p, &one - Complex::with_val(p, &tc * 4u32));
    let tx16 = Complex::with_val(p, &tc * &xc) * 16u32;
    let a = Complex::with_val(p, &u * Complex::with_val(p, &one - &tx16));
    let b = Complex::with_val(p, u.square_ref()) - &tx16;
    let w = Complex::with_val(p, &u + &tx16);
    if w.is_zero() {
        return Err(Error::Degenerate(format!("1 - 4t + 16tx vanishes at t = {t}, x = {x}")));
    }
    let sa = principal_sqrt(&a, ctx);
    let sb = principal_sqrt(&b, ctx);
    let v = Complex::with_val(p, &sa + &sb);
    let da = Complex::with_val(p, Complex::with_val(p, &one - &tx16) * -4i32) - Complex::with_val(p, &xc * &u) * 16u32;
    let db = Complex::with_val(p, &u * -8i32) - Complex::with_val(p, &xc * 16u32);
    let mut dv = Complex::with_val(p, 0);
    if !sa.is_zero() {
        dv += Complex::with_val(p, &da / &sa) / 2u32;
    }
    if !sb.is_zero() {
        dv += Complex::with_val(p, &db / &sb) / 2u32;
    }
    Ok(FParts { t: tc, x: xc, v, w, dv })
}

/// f+ = 4096 t^5 x / v^4 and the rationalized f- = 16 t x v^4 / w^4, v = sqrt(A) + sqrt(B).
pub fn compute_f(sign: Sign, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    let fp = f_parts(t, x, ctx)?;
    let v4 = Complex::with_val(p, fp.v.square_ref()).square();
    let tx = Complex::with_val(p, &fp.t * &fp.x);
    match sign {
        Sign::Plus => {
            if v4.is_zero() {
                return Err(Error::Degenerate(format!("f+ denominator vanishes at t = {t}, x = {x}")));
            }
            let t4 = Complex::with_val(p, fp.t.square_ref()).square();
            Ok(Complex::with_val(p, &t4 * &tx) * 4096u32 / v4)
        }
        Sign::Minus => {
            let w4 = Complex::with_val(p, fp.w.square_ref()).square();
            Ok(Complex::with_val(p, &tx * &v4) * 16u32 / w4)
        }
    }
}

pub fn compute_f_pm(t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<(Complex, Complex)> {
    Ok((compute_f(Sign::Plus, t, x, ctx)?, compute_f(Sign::Minus, t, x, ctx)?))
}

/// df/dt by logarithmic differentiation: f+(5/t - 4v'/v), f-(1/t + 4v'/v - 4w'/w).
pub fn compute_f_prime(sign: Sign, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    if *t == 0 {
        // f+ = O(t^5), f- = 256 t x + O(t^2)
        return Ok(match sign {
            Sign::Plus => Complex::with_val(p, 0),
            Sign::Minus => ctx.crational(&Rational::from(x * 256u32)),
        });
    }
    let fp = f_parts(t, x, ctx)?;
    let f = compute_f(sign, t, x, ctx)?;
    let lv = Complex::with_val(p, &fp.dv / &fp.v) * 4u32;
    let inv_t = Complex::with_val(p, 1u32) / &fp.t;
    let logd = match sign {
        Sign::Plus => Complex::with_val(p, &inv_t * 5u32) - lv,
        Sign::Minus => {
            let dw = Complex::with_val(p, &fp.x * 16u32) - 4u32;
            let lw = Complex::with_val(p, &dw / &fp.w) * 4u32;
            inv_t + lv - lw
        }
    };
    Ok(f * logd)
}

/// The argument of the hypergeometric factor: z for P, f for W.
pub fn compute_arg(family: SeriesFamily, sign: Sign, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Complex> {
    match family {
        SeriesFamily::P => compute_z(sign, t, x, ctx),
        SeriesFamily::W => compute_f(sign, t, x, ctx),
        _ => Err(Error::Domain(format!("family {family} has no modular arguments"))),
    }
}

pub fn compute_arg_derivative(family: SeriesFamily, sign: Sign, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Complex> {
    match family {
        SeriesFamily::P => compute_z_prime(sign, t, x, ctx),
        SeriesFamily::W => compute_f_prime(sign, t, x, ctx),
        _ => Err(Error::Domain(format!("family {family} has no modular arguments"))),
    }
}

fn h_radicand(family: SeriesFamily, t: &Rational, x: &Rational) -> Result<Rational> {
    let tx = Rational::from(t * x);
    match family {
        SeriesFamily::P => Ok(1 - tx * 16u32),
        SeriesFamily::W => Ok(1 - Rational::from(t * 4u32) + tx * 16u32),
        _ => Err(Error::Domain(format!("family {family} has no prefactor h"))),
    }
}

/// h = (1 - 16tx)^(-1/2) for P, (1 - 4t + 16tx)^(-1/2) for W.
pub fn compute_h(family: SeriesFamily, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    let r = h_radicand(family, t, x)?;
    if r <= 0 {
        return Err(Error::Domain(format!("h radicand {r} is not positive")));
    }
    Ok(ctx.rational(&r).sqrt().recip())
}

/// dh/dt: 8x r^(-3/2) for P, (2 - 8x) r^(-3/2) for W.
pub fn compute_h_prime(family: SeriesFamily, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    let r = h_radicand(family, t, x)?;
    if r <= 0 {
        return Err(Error::Domain(format!("h radicand {r} is not positive")));
    }
    let c = match family {
        SeriesFamily::P => Rational::from(x * 8u32),
        _ => 2 - Rational::from(x * 8u32),
    };
    let rf = ctx.rational(&r);
    let r32 = Float::with_val(ctx.prec(), &rf * rf.clone().sqrt());
    Ok(ctx.rational(&c) / r32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cdist;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn close(a: &Complex, b: &Complex, tol: f64) -> bool {
        cdist(a, b).to_f64() < tol
    }

    #[test]
    fn cp1_z() {
        let ctx = PrecisionContext::new(50).unwrap();
        let (zp, zm) = compute_z_pm(&q(1, 100), &q(9, 4), &ctx).unwrap();
        let s7 = ctx.real(7).sqrt();
        let expect_p = Complex::with_val(ctx.prec(), (ctx.real(47) / 128u32, -(s7.clone() * 45u32) / 128u32));
        assert!(close(&zp, &expect_p, 1e-45));
        assert!(close(&zm, &expect_p.conj(), 1e-45));
    }

    #[test]
    fn p1_z_and_zero() {
        let ctx = PrecisionContext::new(40).unwrap();
        let (zp, zm) = compute_z_pm(&q(-1, 192), &q(4, 1), &ctx).unwrap();
        let quarter = ctx.complex(0.25);
        assert!(close(&zp, &quarter, 1e-38) && close(&zm, &quarter, 1e-38));
        let (a, b) = compute_z_pm(&q(0, 1), &q(9, 4), &ctx).unwrap();
        assert!(a.is_zero() && b.is_zero());
    }

    #[test]
    fn h_values() {
        let ctx = PrecisionContext::new(40).unwrap();
        let h = compute_h(SeriesFamily::P, &q(1, 100), &q(9, 4), &ctx).unwrap();
        assert!((h.to_f64() - 1.25).abs() < 1e-15);
        let hw = compute_h(SeriesFamily::W, &q(-1, 108), &q(-49, 12), &ctx).unwrap();
        let expect = ctx.real(133).sqrt() * 9u32 / 133u32;
        assert!(Float::with_val(ctx.prec(), hw - expect).abs() < 1e-38);
        assert_eq!(compute_h(SeriesFamily::P, &q(0, 1), &q(3, 1), &ctx).unwrap(), 1);
    }

    fn central_difference(family: SeriesFamily, sign: Sign, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Complex {
        let step = Rational::from((1, Integer::from(10).pow(30)));
        let a = compute_arg(family, sign, &Rational::from(t + &step), x, ctx).unwrap();
        let b = compute_arg(family, sign, &Rational::from(t - &step), x, ctx).unwrap();
        Complex::with_val(ctx.prec(), a - b) / ctx.rational(&Rational::from(&step * 2u32))
    }

    use rug::ops::Pow;
    use rug::Integer;

    #[test]
    fn derivatives_match_finite_differences() {
        let ctx = PrecisionContext::new(110).unwrap();
        for (fam, t, x) in [
            (SeriesFamily::P, q(1, 100), q(9, 4)),
            (SeriesFamily::P, q(-1, 225), q(-14, 1)),
            (SeriesFamily::W, q(-1, 108), q(-49, 12)),
            (SeriesFamily::W, q(1, 324), q(25, 4)),
        ] {
            for sign in [Sign::Plus, Sign::Minus] {
                let exact = compute_arg_derivative(fam, sign, &t, &x, &ctx).unwrap();
                let fd = central_difference(fam, sign, &t, &x, &ctx);
                let rel = cdist(&exact, &fd).to_f64() / crate::numerics::cabs(&exact).to_f64().max(1e-30);
                assert!(rel < 1e-35, "{fam} {sign:?} rel {rel}");
            }
            let hp = compute_h_prime(fam, &t, &x, &ctx).unwrap();
            let step = Rational::from((1, Integer::from(10).pow(30)));
            let a = compute_h(fam, &Rational::from(&t + &step), &x, &ctx).unwrap();
            let b = compute_h(fam, &Rational::from(&t - &step), &x, &ctx).unwrap();
            let fd = Float::with_val(ctx.prec(), a - b) / ctx.rational(&Rational::from(&step * 2u32));
            assert!((Float::with_val(ctx.prec(), &hp - fd) / &hp).abs() < 1e-35);
        }
    }

    #[test]
    fn z_prime_at_zero() {
        let ctx = PrecisionContext::new(40).unwrap();
        let x = q(9, 4);
        let xf = ctx.complex(2.25);
        let s = principal_sqrt(&Complex::with_val(ctx.prec(), &xf * Complex::with_val(ctx.prec(), &xf - 4u32)), &ctx);
        let d = Complex::with_val(ctx.prec(), 2u32 - xf.clone()) + &s;
        let expect = Complex::with_val(ctx.prec(), 128u32) / d;
        let got = compute_z_prime(Sign::Plus, &q(0, 1), &x, &ctx).unwrap();
        assert!(close(&got, &expect, 1e-35));
    }

    #[test]
    fn f_small_t() {
        let ctx = PrecisionContext::new(60).unwrap();
        let t = q(1, 100_000_000);
        let x = q(-49, 12);
        let (fp, fm) = compute_f_pm(&t, &x, &ctx).unwrap();
        let tx = ctx.rational(&Rational::from(&t * &x));
        let lead_m = Float::with_val(ctx.prec(), &tx * 256u32);
        let rel_m = (Float::with_val(ctx.prec(), fm.real() - &lead_m) / &lead_m).abs();
        assert!(rel_m.to_f64() < 1e-4, "{} {}", fm, lead_m);
        let lead_p = Float::with_val(ctx.prec(), &tx * 256u32) * ctx.rational(&t).square().square();
        let rel_p = (Float::with_val(ctx.prec(), fp.real() - &lead_p) / &lead_p).abs();
        assert!(rel_p.to_f64() < 1e-4);
        let fmp = compute_f_prime(Sign::Minus, &q(0, 1), &x, &ctx).unwrap();
        assert!((fmp.real().to_f64() - 256.0 * -49.0 / 12.0).abs() < 1e-9);
    }

    #[test]
    fn f_product_identity() {
        let ctx = PrecisionContext::new(60).unwrap();
        let (t, x) = (q(1, 324), q(25, 4));
        let (fp, fm) = compute_f_pm(&t, &x, &ctx).unwrap();
        // f+ f- = 4096^2 t^10 x^2 / (A - B)^4 with A - B = 4t(1 - 4t + 16tx)
        let w: Rational = 1 - Rational::from(&t * 4u32) + Rational::from(&t * &x) * 16u32;
        let amb = Rational::from(&t * 4u32) * w;
        let expect = t.clone().pow(10i32) * x.clone().square() * Integer::from(4096).square() / amb.pow(4i32);
        let prod = Complex::with_val(ctx.prec(), &fp * &fm);
        assert!(close(&prod, &ctx.crational(&expect), 1e-45));
    }
}
