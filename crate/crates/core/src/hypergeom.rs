//! Gauss 2F1 on the cut plane C \ [1, inf), its derivative, and complete elliptic integrals.

use crate::error::{Error, Result};
use crate::numerics::{cabs, principal_sqrt, PrecisionContext};
use rug::{Assign, Complex, Float, Rational};

/// Evaluation strategy for 2F1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Power series at z.
    Direct,
    /// (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)).
    PfaffA,
    /// (1-z)^{-b} 2F1(c-a, b; c; z/(z-1)).
    PfaffB,
    /// (1-z)^{c-a-b} 2F1(c-a, c-b; c; z).
    Euler,
    /// AGM form of the quadratic transformation, only for (1/4,1/4;1) and (1/2,1/2;1).
    Quadratic,
    /// Taylor stepping of the hypergeometric ODE along the segment [0, z].
    Continuation,
}

const SERIES_MAX_TERMS: usize = 400_000;
const SELECT_MODULUS: f64 = 0.9;

fn check_args(c: &Rational, z: &Complex) -> Result<()> {
    if *c.denom() == 1 && *c <= 0 {
        return Err(Error::Domain(format!("c = {c} is a non-positive integer")));
    }
    if z.imag().is_zero() && *z.real() >= 1 {
        return Err(Error::Domain(format!("z = {} lies on the cut [1, inf)", z.real().to_f64())));
    }
    Ok(())
}

fn quad_family(a: &Rational, b: &Rational, c: &Rational) -> Option<QuadForm> {
    if *c != 1 || a != b {
        return None;
    }
    if *a == Rational::from((1, 4)) {
        Some(QuadForm::Quarter)
    } else if *a == Rational::from((1, 2)) {
        Some(QuadForm::Half)
    } else {
        None
    }
}

#[derive(Clone, Copy)]
enum QuadForm {
    Quarter,
    Half,
}

/// Plain power series; caller guarantees |z| < 1.
fn series(a: &Rational, b: &Rational, c: &Rational, z: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    let eps = ctx.eps();
    let mut sum = Complex::with_val(p, 1);
    let mut term = Complex::with_val(p, 1);
    let mut small_run = 0usize;
    for n in 0..SERIES_MAX_TERMS {
        let num = Rational::from(a + n as u32) * Rational::from(b + n as u32);
        let den = Rational::from(c + n as u32) * Rational::from(n as u32 + 1);
        if num == 0 {
            return Ok(sum);
        }
        let r = Float::with_val(p, &num / den);
        term *= z;
        term *= &r;
        sum += &term;
        let tmag = cabs(&term);
        let smag = cabs(&sum);
        if tmag < Float::with_val(p, &eps * &smag) {
            small_run += 1;
            if small_run >= 20 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NotConvergent(format!("2F1 series did not settle in {SERIES_MAX_TERMS} terms")))
}

fn cpow(base: &Complex, e: &Rational, ctx: &PrecisionContext) -> Complex {
    let mut w = Complex::with_val(ctx.prec(), base);
    if w.imag().is_zero() {
        w.mut_imag().assign(0);
    }
    let l = w.ln();
    let s = Float::with_val(ctx.prec(), e);
    (l * s).exp()
}

/// Complex AGM, choosing at every step the root with non-negative real part.
pub fn agm(a0: &Complex, b0: &Complex, ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    let eps = ctx.eps();
    let mut a = Complex::with_val(p, a0);
    let mut b = Complex::with_val(p, b0);
    for _ in 0..200 {
        let d = cabs(&Complex::with_val(p, &a - &b));
        if d <= Float::with_val(p, &eps * cabs(&a)) {
            break;
        }
        let an = Complex::with_val(p, &a + &b) / 2;
        let prod = Complex::with_val(p, &a * &b);
        b = principal_sqrt(&prod, ctx);
        a = an;
    }
    a
}

fn quadratic(kind: QuadForm, z: &Complex, ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    let one = Complex::with_val(p, 1);
    // 2F1(1/2,1/2;1;m) = 1/AGM(1, sqrt(1-m))
    let m = match kind {
        QuadForm::Half => Complex::with_val(p, z),
        QuadForm::Quarter => {
            let s = principal_sqrt(&Complex::with_val(p, 1 - z), ctx);
            (Complex::with_val(p, 1) - s) / 2
        }
    };
    let r = principal_sqrt(&Complex::with_val(p, 1 - m), ctx);
    one / agm(&Complex::with_val(p, 1), &r, ctx)
}

/// Value and derivative by Taylor-stepping z(1-z)F'' + (c-(a+b+1)z)F' - abF = 0 from near 0 to z.
fn continuation(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    z: &Complex,
    ctx: &PrecisionContext,
) -> Result<(Complex, Complex)> {
    let p = ctx.prec();
    let zabs = cabs(z).to_f64();
    let start_frac = if zabs <= 0.5 { 1.0 } else { 0.5 / zabs };
    let z0 = Complex::with_val(p, z * Float::with_val(p, start_frac));
    let mut f = series(a, b, c, &z0, ctx)?;
    let ab = Rational::from(a * b);
    let a1 = Rational::from(a + 1u32);
    let b1 = Rational::from(b + 1u32);
    let c1 = Rational::from(c + 1u32);
    let mut fp = series(&a1, &b1, &c1, &z0, ctx)? * Float::with_val(p, &ab / c.clone());
    if start_frac >= 1.0 {
        return Ok((f, fp));
    }
    let dir = Complex::with_val(p, z / Float::with_val(p, cabs(z)));
    let mut s = Float::with_val(p, cabs(&z0));
    let total = cabs(z);
    let abf = Complex::with_val(p, (Float::with_val(p, &ab), 0));
    let abc1 = Float::with_val(p, Rational::from(a + b) + 1u32);
    let cf = Float::with_val(p, c);
    let eps = ctx.eps();
    for _ in 0..100_000 {
        if s >= total {
            break;
        }
        let zk = Complex::with_val(p, &dir * &s);
        let d0 = cabs(&zk).to_f64();
        let d1 = cabs(&Complex::with_val(p, &zk - 1)).to_f64();
        let rho = d0.min(d1);
        let remaining = Float::with_val(p, &total - &s).to_f64();
        let hstep = (rho * 0.5).min(remaining);
        let last = hstep >= remaining;
        let hlen = if last { Float::with_val(p, &total - &s) } else { Float::with_val(p, hstep) };
        let w = Complex::with_val(p, &dir * &hlen);
        // recurrence coefficients at zk
        let p0 = Complex::with_val(p, &zk * Complex::with_val(p, 1 - &zk));
        let p1 = Complex::with_val(p, 1 - Complex::with_val(p, &zk * 2));
        let q0 = Complex::with_val(p, &cf - Complex::with_val(p, &zk * &abc1));
        let q1 = Float::with_val(p, -&abc1);
        let mut y_prev = f.clone();
        let mut y_cur = fp.clone();
        let mut val = Complex::with_val(p, &y_prev);
        let mut der = Complex::with_val(p, &y_cur);
        let mut wpow = Complex::with_val(p, &w); // w^(n+1) for y_{n+1}
        val += Complex::with_val(p, &y_cur * &w);
        let mut small = 0usize;
        let mut n: u32 = 0;
        loop {
            // y_{n+2}
            let nn = Float::with_val(p, n);
            let t1 = Complex::with_val(p, &p1 * &nn) + &q0;
            let t1 = t1 * Float::with_val(p, n + 1) * &y_cur;
            let t2c = Float::with_val(p, -(n as i64 * (n as i64 - 1)))
                + Float::with_val(p, &q1 * &nn);
            let t2 = Complex::with_val(p, &abf * -1) + t2c;
            let t2 = t2 * &y_prev;
            let denom = Complex::with_val(p, &p0 * Float::with_val(p, (n + 2) * (n + 1)));
            let y_next = -(t1 + t2) / denom;
            // der gets (n+2) y_{n+2} w^{n+1}; val gets y_{n+2} w^{n+2}
            let dterm = Complex::with_val(p, &y_next * &wpow) * Float::with_val(p, n + 2);
            der += &dterm;
            wpow *= &w;
            let vterm = Complex::with_val(p, &y_next * &wpow);
            val += &vterm;
            let mag = cabs(&vterm) + cabs(&dterm);
            let scale = cabs(&val) + cabs(&der);
            if mag < Float::with_val(p, &eps * &scale) {
                small += 1;
                if small >= 20 {
                    break;
                }
            } else {
                small = 0;
            }
            y_prev = y_cur;
            y_cur = y_next;
            n += 1;
            if n > 200_000 {
                return Err(Error::NotConvergent("2F1 continuation step".into()));
            }
        }
        f = val;
        fp = der;
        s += &hlen;
        if last {
            break;
        }
    }
    Ok((f, fp))
}

fn transformed_moduli(z: &Complex, ctx: &PrecisionContext) -> (f64, f64) {
    let p = ctx.prec();
    let direct = cabs(z).to_f64();
    let zm1 = Complex::with_val(p, z - 1);
    let pf = (cabs(z) / cabs(&zm1)).to_f64();
    (direct, pf)
}

/// Route chosen automatically: the smallest transformed modulus if it is <= 0.9, then the
/// quadratic route where available, then ODE continuation.
pub fn select_route(a: &Rational, b: &Rational, c: &Rational, z: &Complex, ctx: &PrecisionContext) -> Route {
    let (d, pf) = transformed_moduli(z, ctx);
    if d <= pf && d <= SELECT_MODULUS {
        Route::Direct
    } else if pf <= SELECT_MODULUS {
        Route::PfaffA
    } else if quad_family(a, b, c).is_some() {
        Route::Quadratic
    } else {
        Route::Continuation
    }
}

pub fn gauss_2f1(a: &Rational, b: &Rational, c: &Rational, z: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_args(c, z)?;
    let route = select_route(a, b, c, z, ctx);
    gauss_2f1_route(a, b, c, z, route, ctx)
}

/// Evaluate through a specific route. Series routes refuse transformed moduli above 0.99.
pub fn gauss_2f1_route(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    z: &Complex,
    route: Route,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    check_args(c, z)?;
    // canonical parameter order makes the a <-> b symmetry bit-exact
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let p = ctx.prec();
    if z.real().is_zero() && z.imag().is_zero() {
        return Ok(Complex::with_val(p, 1));
    }
    let (d, pf) = transformed_moduli(z, ctx);
    let guard = |m: f64| -> Result<()> {
        if m > 0.99 {
            Err(Error::NoConvergentRegime(format!("transformed modulus {m:.6} > 0.99 for route {route:?}")))
        } else {
            Ok(())
        }
    };
    let one_minus = Complex::with_val(p, 1 - z);
    match route {
        Route::Direct => {
            guard(d)?;
            series(a, b, c, z, ctx)
        }
        Route::Euler => {
            guard(d)?;
            let ca = Rational::from(c - a);
            let cb = Rational::from(c - b);
            let e = Rational::from(&ca - b);
            Ok(cpow(&one_minus, &e, ctx) * series(&ca, &cb, c, z, ctx)?)
        }
        Route::PfaffA | Route::PfaffB => {
            guard(pf)?;
            let w = Complex::with_val(p, z / Complex::with_val(p, z - 1));
            if route == Route::PfaffA {
                let cb = Rational::from(c - b);
                Ok(cpow(&one_minus, &Rational::from(-a), ctx) * series(a, &cb, c, &w, ctx)?)
            } else {
                let ca = Rational::from(c - a);
                Ok(cpow(&one_minus, &Rational::from(-b), ctx) * series(&ca, b, c, &w, ctx)?)
            }
        }
        Route::Quadratic => match quad_family(a, b, c) {
            Some(k) => Ok(quadratic(k, z, ctx)),
            None => Err(Error::Domain("quadratic route only for (1/4,1/4;1) and (1/2,1/2;1)".into())),
        },
        Route::Continuation => Ok(continuation(a, b, c, z, ctx)?.0),
    }
}

/// d/dz 2F1 = (ab/c) 2F1(a+1, b+1; c+1; z).
pub fn gauss_2f1_derivative(a: &Rational, b: &Rational, c: &Rational, z: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_args(c, z)?;
    let a1 = Rational::from(a + 1u32);
    let b1 = Rational::from(b + 1u32);
    let c1 = Rational::from(c + 1u32);
    let f = gauss_2f1(&a1, &b1, &c1, z, ctx)?;
    let k = Rational::from(a * b) / c.clone();
    Ok(f * Float::with_val(ctx.prec(), &k))
}

/// Value and derivative from the continuation route (independent of the contiguous relation).
pub fn gauss_2f1_with_derivative_ode(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    z: &Complex,
    ctx: &PrecisionContext,
) -> Result<(Complex, Complex)> {
    check_args(c, z)?;
    continuation(a, b, c, z, ctx)
}

fn check_modulus(k: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let k2 = Complex::with_val(ctx.prec(), k.square_ref());
    if k2.imag().is_zero() && *k2.real() >= 1 {
        return Err(Error::Domain("k^2 lies on [1, inf)".into()));
    }
    Ok(k2)
}

/// K(k) with 2F1(1/2,1/2;1;k^2) = (2/pi) K(k).
pub fn elliptic_k(k: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    let k2 = check_modulus(k, ctx)?;
    let kp = principal_sqrt(&Complex::with_val(p, 1 - &k2), ctx);
    let m = agm(&Complex::with_val(p, 1), &kp, ctx);
    let pi = crate::numerics::const_pi(ctx);
    Ok(Complex::with_val(p, pi / (m * 2)))
}

/// E(k) via the AGM with E = K (1 - sum 2^{n-1} c_n^2), c_0^2 = k^2.
pub fn elliptic_e(k: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    let k2 = check_modulus(k, ctx)?;
    let kp = principal_sqrt(&Complex::with_val(p, 1 - &k2), ctx);
    let eps = ctx.eps();
    let mut a = Complex::with_val(p, 1);
    let mut b = kp;
    let mut sum = Complex::with_val(p, &k2) / 2;
    let mut pow2 = Float::with_val(p, 0.5);
    for _ in 0..200 {
        let cn = Complex::with_val(p, &a - &b) / 2;
        if cabs(&cn) <= Float::with_val(p, &eps * cabs(&a)) {
            break;
        }
        let an = Complex::with_val(p, &a + &b) / 2;
        let prod = Complex::with_val(p, &a * &b);
        b = principal_sqrt(&prod, ctx);
        a = an;
        pow2 *= 2;
        sum += Complex::with_val(p, cn.square_ref()) * &pow2;
    }
    let pi = crate::numerics::const_pi(ctx);
    let kk = Complex::with_val(p, pi / (a * 2));
    Ok(Complex::with_val(p, &kk * Complex::with_val(p, 1 - sum)))
}
