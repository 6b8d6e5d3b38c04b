//! Eta, Eisenstein series, the level-2 hauptmoduls and the forms Y, B, C built from them.

use crate::error::{Error, Result};
use crate::numerics::{const_pi, principal_sqrt, PrecisionContext};
use num_complex::Complex64;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MIN_IM_TAU: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveTag {
    X0_2,
    X0_2Plus,
}

/// A point of the upper half-plane, optionally with the quadratic form it is a root of.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau {
    pub value: Complex,
    pub form: Option<(i64, i64, i64)>,
}

impl Tau {
    pub fn new(value: Complex) -> Result<Tau> {
        if *value.imag() <= 0 {
            return Err(Error::Domain("tau must lie in the upper half-plane".into()));
        }
        Ok(Tau { value, form: None })
    }
}

fn check_tau(tau: &Complex) -> Result<()> {
    if *tau.imag() <= 0 {
        return Err(Error::Domain(format!("Im(tau) = {} is not positive", tau.imag().to_f64())));
    }
    if tau.imag().to_f64() < MIN_IM_TAU {
        return Err(Error::PrecisionUnreachable(format!(
            "Im(tau) = {:.4} is below {MIN_IM_TAU}; reduce tau first",
            tau.imag().to_f64()
        )));
    }
    Ok(())
}

fn two_pi_i(ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    Complex::with_val(p, (0, Float::with_val(p, const_pi(ctx) * 2u32)))
}

/// exp(2 pi i tau / k).
fn q_frac(tau: &Complex, k: u32, ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    Complex::with_val(p, two_pi_i(ctx) * tau / k).exp()
}

pub fn nome(tau: &Complex, ctx: &PrecisionContext) -> Complex {
    q_frac(tau, 1, ctx)
}

/// eta(tau) = q^(1/24) prod (1 - q^n).
pub fn dedekind_eta(tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_tau(tau)?;
    let p = ctx.prec();
    let q = nome(tau, ctx);
    let eps = ctx.eps();
    let mut qn = q.clone();
    let mut prod = Complex::with_val(p, 1);
    loop {
        prod *= Complex::with_val(p, 1u32 - &qn);
        if Float::with_val(p, qn.abs_ref()) < eps {
            break;
        }
        qn *= &q;
    }
    Ok(q_frac(tau, 24, ctx) * prod)
}

fn divisor_sums(n_max: usize, k: u32) -> Vec<u128> {
    let mut s = vec![0u128; n_max + 1];
    for d in 1..=n_max {
        let dk = (d as u128).pow(k);
        let mut m = d;
        while m <= n_max {
            s[m] += dk;
            m += d;
        }
    }
    s
}

fn q_terms_needed(tau: &Complex, ctx: &PrecisionContext, k: u32) -> usize {
    let im = tau.imag().to_f64();
    let digits = ctx.working_digits() as f64 + 2.0;
    // |q|^n n^k < 10^-digits
    let decay = 2.0 * PI * im / std::f64::consts::LN_10;
    let mut n = (digits / decay).ceil();
    for _ in 0..4 {
        n = ((digits + (k as f64) * n.max(1.0).log10()) / decay).ceil();
    }
    n as usize + 2
}

/// (E2, E4, E6) at tau from q-expansions with constant term 1.
pub fn eisenstein_all(tau: &Complex, ctx: &PrecisionContext) -> Result<(Complex, Complex, Complex)> {
    check_tau(tau)?;
    let p = ctx.prec();
    let n_max = q_terms_needed(tau, ctx, 5);
    let s1 = divisor_sums(n_max, 1);
    let s3 = divisor_sums(n_max, 3);
    let s5 = divisor_sums(n_max, 5);
    let q = nome(tau, ctx);
    let mut qn = q.clone();
    let mut a1 = Complex::with_val(p, 0);
    let mut a3 = Complex::with_val(p, 0);
    let mut a5 = Complex::with_val(p, 0);
    for n in 1..=n_max {
        a1 += Complex::with_val(p, &qn * Float::with_val(p, s1[n]));
        a3 += Complex::with_val(p, &qn * Float::with_val(p, s3[n]));
        a5 += Complex::with_val(p, &qn * Float::with_val(p, s5[n]));
        qn *= &q;
    }
    let e2 = 1u32 - a1 * 24u32;
    let e4 = 1u32 + a3 * 240u32;
    let e6 = 1u32 - a5 * 504u32;
    Ok((Complex::with_val(p, e2), Complex::with_val(p, e4), Complex::with_val(p, e6)))
}

pub fn eisenstein(k: u32, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let (e2, e4, e6) = eisenstein_all(tau, ctx)?;
    match k {
        2 => Ok(e2),
        4 => Ok(e4),
        6 => Ok(e6),
        _ => Err(Error::Domain(format!("weight {k} not supported"))),
    }
}

/// DE2, D^2 E2 from Ramanujan's identities (D = q d/dq).
fn e2_derivatives(tau: &Complex, ctx: &PrecisionContext) -> Result<(Complex, Complex, Complex)> {
    let p = ctx.prec();
    let (e2, e4, e6) = eisenstein_all(tau, ctx)?;
    let de2 = Complex::with_val(p, Complex::with_val(p, e2.square_ref()) - &e4) / 12u32;
    let de4 = Complex::with_val(p, Complex::with_val(p, &e2 * &e4) - &e6) / 3u32;
    let d2e2 = Complex::with_val(p, Complex::with_val(p, &e2 * &de2) * 2u32 - de4) / 12u32;
    Ok((e2, de2, d2e2))
}

/// T(tau) = -64 q prod (1 + q^n)^24 on X0(2).
fn t_level2(tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_tau(tau)?;
    let p = ctx.prec();
    let q = nome(tau, ctx);
    let eps = ctx.eps();
    let mut qn = q.clone();
    let mut prod = Complex::with_val(p, 1);
    loop {
        prod *= Complex::with_val(p, 1u32 + &qn);
        if Float::with_val(p, qn.abs_ref()) < eps {
            break;
        }
        qn *= &q;
    }
    let p24 = rug::ops::Pow::pow(prod, 24u32);
    Ok(Complex::with_val(p, q * p24) * -64i32)
}

fn plus_from_t(t: &Complex, ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    let om = Complex::with_val(p, 1u32 - t);
    Complex::with_val(p, t * -4i32) / om.square()
}

pub fn hauptmodul(curve: CurveTag, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let t = t_level2(tau, ctx)?;
    Ok(match curve {
        CurveTag::X0_2 => t,
        CurveTag::X0_2Plus => plus_from_t(&t, ctx),
    })
}

/// The X0(2)+ hauptmodul straight from the eta quotient 256 eta(tau)^24 eta(2tau)^24 / (64 eta(2tau)^24 + eta(tau)^24)^2.
pub fn hauptmodul_plus_eta(tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    let a = rug::ops::Pow::pow(dedekind_eta(tau, ctx)?, 24u32);
    let tau2 = Complex::with_val(p, tau * 2u32);
    let b = rug::ops::Pow::pow(dedekind_eta(&tau2, ctx)?, 24u32);
    let den = (Complex::with_val(p, &b * 64u32) + &a).square();
    Ok(Complex::with_val(p, a * b) * 256u32 / den)
}

/// [T, DT, D^2 T, D^3 T] with D = (1/2 pi i) d/dtau; entries past `order` are zero.
pub fn hauptmodul_derivatives(curve: CurveTag, tau: &Complex, order: u32, ctx: &PrecisionContext) -> Result<[Complex; 4]> {
    let p = ctx.prec();
    let t = t_level2(tau, ctx)?;
    let zero = Complex::with_val(p, 0);
    let mut out = [t.clone(), zero.clone(), zero.clone(), zero.clone()];
    if order >= 1 {
        let tau2 = Complex::with_val(p, tau * 2u32);
        let (a2, da2, dda2) = e2_derivatives(&tau2, ctx)?;
        let (a1, da1, dda1) = e2_derivatives(tau, ctx)?;
        let g = Complex::with_val(p, &a2 * 2u32) - &a1;
        let dg = Complex::with_val(p, &da2 * 4u32) - &da1;
        let ddg = Complex::with_val(p, &dda2 * 8u32) - &dda1;
        let dt = Complex::with_val(p, &t * &g);
        let d2t = Complex::with_val(p, &dt * &g) + Complex::with_val(p, &t * &dg);
        let d3t = Complex::with_val(p, &d2t * &g) + Complex::with_val(p, &dt * &dg) * 2u32 + Complex::with_val(p, &t * &ddg);
        out[1] = dt;
        if order >= 2 {
            out[2] = d2t;
        }
        if order >= 3 {
            out[3] = d3t;
        }
    }
    if curve == CurveTag::X0_2Plus {
        out = chain_to_plus(&out, order, ctx);
    }
    Ok(out)
}

fn chain_to_plus(d: &[Complex; 4], order: u32, ctx: &PrecisionContext) -> [Complex; 4] {
    let p = ctx.prec();
    let t = &d[0];
    let om = Complex::with_val(p, 1u32 - t);
    let om2 = Complex::with_val(p, om.square_ref());
    let om3 = Complex::with_val(p, &om2 * &om);
    let om4 = Complex::with_val(p, om2.square_ref());
    let om5 = Complex::with_val(p, &om4 * &om);
    let phi = plus_from_t(t, ctx);
    let phi1 = Complex::with_val(p, Complex::with_val(p, 1u32 + t) * -4i32) / &om3;
    let phi2 = Complex::with_val(p, Complex::with_val(p, Complex::with_val(p, t * 2u32) + 4u32) * -4i32) / &om4;
    let phi3 = Complex::with_val(p, Complex::with_val(p, t + 3u32) * -24i32) / &om5;
    let zero = Complex::with_val(p, 0);
    let mut out = [phi, zero.clone(), zero.clone(), zero];
    if order >= 1 {
        out[1] = Complex::with_val(p, &phi1 * &d[1]);
    }
    if order >= 2 {
        let dt2 = Complex::with_val(p, d[1].square_ref());
        out[2] = Complex::with_val(p, &phi2 * &dt2) + Complex::with_val(p, &phi1 * &d[2]);
    }
    if order >= 3 {
        let dt2 = Complex::with_val(p, d[1].square_ref());
        let dt3 = Complex::with_val(p, &dt2 * &d[1]);
        out[3] = Complex::with_val(p, &phi3 * &dt3)
            + Complex::with_val(p, Complex::with_val(p, &phi2 * &d[1]) * &d[2]) * 3u32
            + Complex::with_val(p, &phi1 * &d[3]);
    }
    out
}

/// D^order T for order in 1..=3.
pub fn hauptmodul_d(curve: CurveTag, tau: &Complex, order: u32, ctx: &PrecisionContext) -> Result<Complex> {
    if !(1..=3).contains(&order) {
        return Err(Error::Domain(format!("derivative order {order} not in 1..=3")));
    }
    let d = hauptmodul_derivatives(curve, tau, order, ctx)?;
    Ok(d[order as usize].clone())
}

/// Everything Y, B, C, f need at one tau, principal branch of sqrt(1 - T).
#[derive(Clone, Debug)]
pub struct ModularData {
    pub curve: CurveTag,
    pub tau: Complex,
    pub t: Complex,
    pub dt: Complex,
    pub d2t: Complex,
    pub sqrt_one_minus_t: Complex,
    pub y: Complex,
    pub dlog_y: Complex,
}

impl ModularData {
    pub fn at(curve: CurveTag, tau: &Complex, ctx: &PrecisionContext) -> Result<ModularData> {
        let p = ctx.prec();
        let d = hauptmodul_derivatives(curve, tau, 2, ctx)?;
        let [t, dt, d2t, _] = d;
        let om = Complex::with_val(p, 1u32 - &t);
        if t.is_zero() || dt.is_zero() || Float::with_val(p, om.abs_ref()) < ctx.eps() {
            return Err(Error::Branch("T(tau) is 0 or 1; Y has a pole or branch point".into()));
        }
        let s = principal_sqrt(&om, ctx);
        let y = Complex::with_val(p, &dt / Complex::with_val(p, &t * &s));
        let dlog_y = Complex::with_val(p, &d2t / &dt) - Complex::with_val(p, &dt / &t)
            + Complex::with_val(p, &dt / Complex::with_val(p, &om * 2u32));
        Ok(ModularData { curve, tau: tau.clone(), t, dt, d2t, sqrt_one_minus_t: s, y, dlog_y })
    }

    /// f = DY/Y - 1/(2 pi Im tau).
    pub fn quasi_f(&self, ctx: &PrecisionContext) -> Complex {
        let p = ctx.prec();
        let corr = Float::with_val(p, const_pi(ctx) * self.tau.imag()) * 2u32;
        Complex::with_val(p, &self.dlog_y - corr.recip())
    }

    pub fn b(&self, ctx: &PrecisionContext) -> Complex {
        let p = ctx.prec();
        self.quasi_f(ctx) / Complex::with_val(p, &self.sqrt_one_minus_t * &self.y)
    }

    pub fn c(&self, ctx: &PrecisionContext) -> Complex {
        let p = ctx.prec();
        Complex::with_val(p, &self.sqrt_one_minus_t * Float::with_val(p, self.tau.imag() * 2u32))
    }
}

pub fn weight1_y(curve: CurveTag, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(ModularData::at(curve, tau, ctx)?.y)
}

pub fn quasi_b(curve: CurveTag, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(ModularData::at(curve, tau, ctx)?.b(ctx))
}

pub fn scaling_c(curve: CurveTag, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_tau(tau)?;
    let p = ctx.prec();
    let t = hauptmodul(curve, tau, ctx)?;
    let om = Complex::with_val(p, 1u32 - &t);
    if Float::with_val(p, om.abs_ref()) < ctx.eps() {
        return Err(Error::Branch("T(tau) = 1".into()));
    }
    Ok(principal_sqrt(&om, ctx) * Float::with_val(p, tau.imag() * 2u32))
}

pub fn quasi_f(curve: CurveTag, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(ModularData::at(curve, tau, ctx)?.quasi_f(ctx))
}

/// j = -(16 - 64T)^3 / (64T).
pub fn j_from_t(t: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    if t.is_zero() {
        return Err(Error::Domain("j has a pole at T = 0".into()));
    }
    let a = Complex::with_val(p, 16u32 - Complex::with_val(p, t * 64u32));
    let a3 = rug::ops::Pow::pow(a, 3u32);
    Ok(-(a3 / Complex::with_val(p, t * 64u32)))
}

pub fn j_invariant(tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    j_from_t(&hauptmodul(CurveTag::X0_2, tau, ctx)?, ctx)
}

/// Double-precision versions for path tracking and search screening.
pub mod fast {
    use super::*;

    fn q_of(tau: Complex64) -> Complex64 {
        (Complex64::new(0.0, 2.0 * PI) * tau).exp()
    }

    fn e2(tau: Complex64) -> Complex64 {
        let q = q_of(tau);
        let mut s = Complex64::new(0.0, 0.0);
        let mut qn = q;
        let mut n = 1u32;
        while qn.norm() * (n as f64) > 1e-18 && n < 4000 {
            s += qn * (n as f64) / (1.0 - qn);
            qn *= q;
            n += 1;
        }
        1.0 - 24.0 * s
    }

    /// T on X0(2) in f64; None below the Im floor.
    pub fn t_level2(tau: Complex64) -> Option<Complex64> {
        if tau.im < MIN_IM_TAU {
            return None;
        }
        let q = q_of(tau);
        let mut qn = q;
        let mut prod = Complex64::new(1.0, 0.0);
        while qn.norm() > 1e-18 {
            prod *= 1.0 + qn;
            qn *= q;
        }
        Some(-64.0 * q * prod.powu(24))
    }

    /// (T, DT) on the chosen curve.
    pub fn t_and_dt(curve: CurveTag, tau: Complex64) -> Option<(Complex64, Complex64)> {
        let t = t_level2(tau)?;
        let g = 2.0 * e2(2.0 * tau) - e2(tau);
        let dt = t * g;
        Some(match curve {
            CurveTag::X0_2 => (t, dt),
            CurveTag::X0_2Plus => {
                let om = 1.0 - t;
                (-4.0 * t / (om * om), -4.0 * (1.0 + t) / (om * om * om) * dt)
            }
        })
    }

    pub fn hauptmodul(curve: CurveTag, tau: Complex64) -> Option<Complex64> {
        t_and_dt(curve, tau).map(|v| v.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cdist;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    fn c(ctx: &PrecisionContext, re: f64, im: f64) -> Complex {
        Complex::with_val(ctx.prec(), (re, im))
    }

    fn tau_cp1(ctx: &PrecisionContext) -> Complex {
        let p = ctx.prec();
        Complex::with_val(p, (Float::with_val(p, 0.25), ctx.real(7).sqrt() / 4u32))
    }

    #[test]
    fn eta_at_i() {
        let k = ctx(40);
        let e = dedekind_eta(&c(&k, 0.0, 1.0), &k).unwrap();
        // Gamma(1/4) / (2 pi^(3/4))
        let g = Float::with_val(k.prec(), 0.25).gamma();
        let pi = const_pi(&k);
        let pi34 = Float::with_val(k.prec(), pi.sqrt_ref()) * Float::with_val(k.prec(), pi.sqrt_ref()).sqrt();
        let oracle = g / (pi34 * 2u32);
        assert!(cdist(&e, &Complex::with_val(k.prec(), oracle)).to_f64() < 1e-38);
    }

    #[test]
    fn im_floor() {
        let k = ctx(30);
        assert!(matches!(dedekind_eta(&c(&k, 0.0, 0.01), &k), Err(Error::PrecisionUnreachable(_))));
        assert!(matches!(dedekind_eta(&c(&k, 0.0, -1.0), &k), Err(Error::Domain(_))));
    }

    #[test]
    fn e2_at_i() {
        let k = ctx(40);
        let e2 = eisenstein(2, &c(&k, 0.0, 1.0), &k).unwrap();
        let expect = Float::with_val(k.prec(), 3u32) / const_pi(&k);
        assert!(cdist(&e2, &Complex::with_val(k.prec(), expect)).to_f64() < 1e-38);
    }

    #[test]
    fn cp1_point_values() {
        let k = ctx(60);
        let tau = tau_cp1(&k);
        let t = hauptmodul(CurveTag::X0_2, &tau, &k).unwrap();
        let s7 = k.real(7).sqrt();
        let expect = Complex::with_val(k.prec(), (k.real(47) / 128u32, -(s7.clone() * 45u32) / 128u32));
        assert!(cdist(&t, &expect).to_f64() < 1e-40);
        let j = j_from_t(&t, &k).unwrap();
        assert!(cdist(&j, &k.complex(-3375)).to_f64() < 1e-35);
        let md = ModularData::at(CurveTag::X0_2, &tau, &k).unwrap();
        let b = md.b(&k);
        let b_expect = Complex::with_val(k.prec(), (-0.25, -(s7.clone() / 84u32)));
        assert!(cdist(&b, &b_expect).to_f64() < 1e-40);
        let cc = md.c(&k);
        let c_expect = Complex::with_val(k.prec(), (s7 * 15u32 / 32u32, k.real(21) / 32u32));
        assert!(cdist(&cc, &c_expect).to_f64() < 1e-40);
    }

    #[test]
    fn p1_point_values() {
        let k = ctx(50);
        let p = k.prec();
        let tau = Complex::with_val(p, (-0.5, k.real(3).sqrt() / 2u32));
        let t = hauptmodul(CurveTag::X0_2, &tau, &k).unwrap();
        assert!(cdist(&t, &k.complex(0.25)).to_f64() < 1e-45);
        let b = quasi_b(CurveTag::X0_2, &tau, &k).unwrap();
        assert!(cdist(&b, &k.crational(&rug::Rational::from((-1, 6)))).to_f64() < 1e-45);
        let tau2 = Complex::with_val(p, (0.5, k.real(3).sqrt() / 2u32));
        let cc = scaling_c(CurveTag::X0_2, &tau2, &k).unwrap();
        assert!(cdist(&cc, &k.complex(1.5)).to_f64() < 1e-45);
    }

    #[test]
    fn large_im_limits() {
        let k = ctx(30);
        let tau = c(&k, 0.1, 8.0);
        let t = hauptmodul(CurveTag::X0_2, &tau, &k).unwrap();
        let lead = nome(&tau, &k) * -64i32;
        assert!((cdist(&t, &lead).to_f64() / crate::numerics::cabs(&t).to_f64()) < 1e-18);
        let dt = hauptmodul_d(CurveTag::X0_2, &tau, 1, &k).unwrap();
        assert!(cdist(&Complex::with_val(k.prec(), &dt / &t), &k.complex(1)).to_f64() < 1e-18);
        let y = weight1_y(CurveTag::X0_2, &tau, &k).unwrap();
        assert!(cdist(&y, &k.complex(1)).to_f64() < 1e-18);
        let cc = scaling_c(CurveTag::X0_2, &tau, &k).unwrap();
        assert!(cdist(&cc, &k.complex(16)).to_f64() < 1e-18);
    }

    #[test]
    fn plus_curve_routes_agree() {
        let k = ctx(50);
        for (re, im) in [(0.1, 0.8), (-0.3, 1.1), (0.0, 0.72)] {
            let tau = c(&k, re, im);
            let a = hauptmodul(CurveTag::X0_2Plus, &tau, &k).unwrap();
            let b = hauptmodul_plus_eta(&tau, &k).unwrap();
            assert!(cdist(&a, &b).to_f64() < 1e-45);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = ctx(80);
        let p = k.prec();
        let tau = c(&k, 0.1, 1.2);
        let h = k.ten_pow(-20);
        let two_pi_i_h = Complex::with_val(p, two_pi_i(&k) * &h) * 2u32;
        for curve in [CurveTag::X0_2, CurveTag::X0_2Plus] {
            let d = hauptmodul_derivatives(curve, &tau, 3, &k).unwrap();
            let tp = Complex::with_val(p, &tau + &h);
            let tm = Complex::with_val(p, &tau - &h);
            let dp = hauptmodul_derivatives(curve, &tp, 3, &k).unwrap();
            let dm = hauptmodul_derivatives(curve, &tm, 3, &k).unwrap();
            for order in 0..3 {
                let fd = Complex::with_val(p, &dp[order] - &dm[order]) / &two_pi_i_h;
                let rel = cdist(&fd, &d[order + 1]).to_f64() / crate::numerics::cabs(&d[order + 1]).to_f64();
                assert!(rel < 1e-30, "{curve:?} order {} rel {rel}", order + 1);
            }
        }
    }

    #[test]
    fn fast_matches_full() {
        let k = ctx(30);
        let tau = Complex64::new(0.17, 0.45);
        for curve in [CurveTag::X0_2, CurveTag::X0_2Plus] {
            let (t, dt) = fast::t_and_dt(curve, tau).unwrap();
            let full = hauptmodul_derivatives(curve, &c(&k, 0.17, 0.45), 1, &k).unwrap();
            assert!((t - crate::numerics::to_c64(&full[0])).norm() < 1e-11 * t.norm().max(1.0));
            assert!((dt - crate::numerics::to_c64(&full[1])).norm() < 1e-10 * dt.norm().max(1.0));
        }
    }
}
