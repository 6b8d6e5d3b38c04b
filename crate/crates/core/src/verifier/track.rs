//! Analytic continuation of tau(t) with T(tau(t)) = z(t) from t ~ 0 to the case point.
//!
//! The path is t(s) = t1 (s + i delta s (1 - s)), s in (0, 1]. Along it we solve for tau in
//! double precision and carry every square root continuously: the radicals inside z or f,
//! sqrt(1 - T(tau)) and Z = sqrt(Y(tau)). The end state says which sheet each quantity lands on.

use crate::cm::QuadraticForm;
use crate::error::{Error, Result};
use crate::modular::{fast, CurveTag, MIN_IM_TAU};
use crate::series::SeriesFamily;
use crate::verifier::args::Sign;
use num_complex::Complex64;
use std::f64::consts::PI;

pub const PATH_DELTA: f64 = 0.1;

const S_START: f64 = 1e-4;
const MAX_DS: f64 = 0.01;
const MIN_DS: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pick +-w nearest to prev; None when the choice is not clear-cut.
fn continue_sign(w: Complex64, prev: Complex64) -> Option<Complex64> {
    let (dp, dm) = ((w - prev).norm(), (w + prev).norm());
    let (best, other) = if dp <= dm { (w, dm) } else { (-w, dp) };
    let near = dp.min(dm);
    if near < 0.5 * other || prev.norm() == 0.0 {
        Some(best)
    } else {
        None
    }
}

/// Radicals of the argument formula carried along the path.
#[derive(Clone, Copy, Debug)]
enum Radicals {
    P { s: Complex64 },
    W { sa: Complex64, sb: Complex64 },
}

fn radicals_principal(family: SeriesFamily, t: Complex64, x: f64) -> Radicals {
    match family {
        SeriesFamily::P => Radicals::P { s: (x * (x - 4.0) * (1.0 - 64.0 * t)).sqrt() },
        _ => {
            let u = 1.0 - 4.0 * t;
            Radicals::W { sa: (u * (1.0 - 16.0 * t * x)).sqrt(), sb: (u * u - 16.0 * t * x).sqrt() }
        }
    }
}

fn radicals_continue(prev: Radicals, family: SeriesFamily, t: Complex64, x: f64) -> Option<Radicals> {
    let fresh = radicals_principal(family, t, x);
    match (prev, fresh) {
        (Radicals::P { s: ps }, Radicals::P { s }) => {
            if ps.norm() == 0.0 && s.norm() == 0.0 {
                return Some(fresh);
            }
            Some(Radicals::P { s: continue_sign(s, ps)? })
        }
        (Radicals::W { sa: pa, sb: pb }, Radicals::W { sa, sb }) => {
            Some(Radicals::W { sa: continue_sign(sa, pa)?, sb: continue_sign(sb, pb)? })
        }
        _ => None,
    }
}

fn arg_value(sign: Sign, t: Complex64, x: f64, r: Radicals) -> Complex64 {
    match r {
        Radicals::P { s } => {
            // (u + s)(u - s) = (2 - 32tx)^2; divide by the larger factor
            let u = 32.0 * t * x - x + 2.0;
            let ss = sign.as_f64() * s;
            if (u + ss).norm() >= (u - ss).norm() {
                128.0 * t / (u + ss)
            } else {
                128.0 * t * (u - ss) / (2.0 - 32.0 * t * x).powu(2)
            }
        }
        Radicals::W { sa, sb } => {
            let v = sa + sb;
            let v4 = v.powu(4);
            match sign {
                Sign::Plus => 4096.0 * t.powu(5) * x / v4,
                Sign::Minus => {
                    let w = 1.0 - 4.0 * t + 16.0 * t * x;
                    16.0 * t * x * v4 / w.powu(4)
                }
            }
        }
    }
}

pub fn curve_of(family: SeriesFamily) -> CurveTag {
    match family {
        SeriesFamily::W => CurveTag::X0_2Plus,
        _ => CurveTag::X0_2,
    }
}

#[derive(Clone, Copy, Debug)]
struct State {
    s: f64,
    tau: Complex64,
    t_val: Complex64,
    dt_val: Complex64,
    sq: Complex64,
    z: Complex64,
    rad: Radicals,
    arg: Complex64,
}

/// End of a tracked branch.
#[derive(Clone, Copy, Debug)]
pub struct TrackEnd {
    pub tau: Complex64,
    /// continued sqrt(1 - T) at the end point
    pub sqrt_one_minus_t: Complex64,
    /// continued Z = sqrt(Y)
    pub z: Complex64,
    /// continued argument z(t1) or f(t1)
    pub arg: Complex64,
    pub steps: usize,
}

fn newton(curve: CurveTag, target: Complex64, guess: Complex64) -> Option<(Complex64, Complex64, Complex64)> {
    let two_pi_i = c(0.0, 2.0 * PI);
    let mut tau = guess;
    for _ in 0..40 {
        if tau.im < MIN_IM_TAU {
            return None;
        }
        let (t, dt) = fast::t_and_dt(curve, tau)?;
        // solve log(T / target) = 0; d log T / d tau = 2 pi i DT / T
        let step = (t / target).ln() / (two_pi_i * dt / t);
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        tau -= step;
        if step.norm() < 1e-14 * (1.0 + tau.norm()) {
            let (t, dt) = fast::t_and_dt(curve, tau)?;
            return Some((tau, t, dt));
        }
    }
    None
}

fn path_t(t1: f64, s: f64, delta: f64) -> Complex64 {
    t1 * c(s, delta * s * (1.0 - s))
}

fn try_step(family: SeriesFamily, sign: Sign, t1: f64, x: f64, delta: f64, prev: &State, s: f64) -> Option<State> {
    let curve = curve_of(family);
    let t = path_t(t1, s, delta);
    let rad = radicals_continue(prev.rad, family, t, x)?;
    let arg = arg_value(sign, t, x, rad);
    if (arg - prev.arg).norm() > 0.5 * prev.arg.norm().max(arg.norm()) && s > 2.0 * S_START {
        // allow large relative moves only while z is still tiny
        if prev.arg.norm() > 1e-3 {
            return None;
        }
    }
    let two_pi_i = c(0.0, 2.0 * PI);
    let guess = prev.tau + (arg / prev.arg).ln() / (two_pi_i * prev.dt_val / prev.t_val);
    let (tau, t_val, dt_val) = newton(curve, arg, guess)?;
    if (tau - prev.tau).norm() > 0.2 * prev.tau.im.min(tau.im) {
        return None;
    }
    let sq = continue_sign((1.0 - t_val).sqrt(), prev.sq)?;
    let y = dt_val / (t_val * sq);
    let z = continue_sign(y.sqrt(), prev.z)?;
    Some(State { s, tau, t_val, dt_val, sq, z, rad, arg })
}

/// Continue one branch from t ~ 0 to t1.
pub fn track_branch(family: SeriesFamily, sign: Sign, t1: f64, x: f64, delta: f64) -> Result<TrackEnd> {
    if family.evidence_only() {
        return Err(Error::Domain(format!("family {family} has no modular branches")));
    }
    if t1 == 0.0 {
        return Err(Error::Degenerate("t = 0 has no CM point".into()));
    }
    let curve = curve_of(family);
    let lead = match family {
        SeriesFamily::P => -64.0,
        _ => 256.0,
    };
    let t0 = path_t(t1, S_START, delta);
    let rad = radicals_principal(family, t0, x);
    let arg = arg_value(sign, t0, x, rad);
    if arg.norm() == 0.0 || !arg.re.is_finite() {
        return Err(Error::Continuation("argument vanishes at the start of the path".into()));
    }
    let guess = (arg / lead).ln() / c(0.0, 2.0 * PI);
    let (tau, t_val, dt_val) =
        newton(curve, arg, guess).ok_or_else(|| Error::Continuation("cannot start the path near the cusp".into()))?;
    let sq = (1.0 - t_val).sqrt();
    let z = (dt_val / (t_val * sq)).sqrt();
    let mut st = State { s: S_START, tau, t_val, dt_val, sq, z, rad, arg };
    let mut ds = S_START;
    let mut steps = 0usize;
    while st.s < 1.0 {
        let s_next = (st.s + ds).min(1.0);
        match try_step(family, sign, t1, x, delta, &st, s_next) {
            Some(next) => {
                st = next;
                steps += 1;
                ds = (ds * 1.5).min(MAX_DS).min(st.s);
            }
            None => {
                ds *= 0.5;
                if ds < MIN_DS {
                    return Err(Error::Continuation(format!("step size underflow at s = {:.6}", st.s)));
                }
            }
        }
    }
    Ok(TrackEnd { tau: st.tau, sqrt_one_minus_t: st.sq, z: st.z, arg: st.arg, steps })
}

/// Exact form with -disc in {D, 4D, D/4} whose root is tau (after reducing Re tau by translation).
pub fn snap_tau(tau: Complex64, d: u32) -> Option<QuadraticForm> {
    let shift = (tau.re + 0.5).floor();
    let red = c(tau.re - shift, tau.im);
    let mut cands = vec![d as i64, 4 * d as i64];
    if d.is_multiple_of(4) {
        cands.push(d as i64 / 4);
    }
    for dd in cands {
        let a = ((dd as f64).sqrt() / (2.0 * red.im)).round() as i64;
        if a <= 0 {
            continue;
        }
        let b = (-2.0 * a as f64 * red.re).round() as i64;
        let num = b * b + dd;
        if num % (4 * a) != 0 {
            continue;
        }
        let f = QuadraticForm { a, b, c: num / (4 * a), level: if a % 2 == 0 { 2 } else { 1 } };
        if (f.root_f64() - red).norm() < 1e-8 * (1.0 + red.norm()) {
            return Some(f);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp1_branches_land_on_table_points() {
        let plus = track_branch(SeriesFamily::P, Sign::Plus, 0.01, 2.25, PATH_DELTA).unwrap();
        let f = snap_tau(plus.tau, 7).unwrap();
        assert_eq!((f.a, f.b, f.c), (2, -1, 1));
        let minus = track_branch(SeriesFamily::P, Sign::Minus, 0.01, 2.25, PATH_DELTA).unwrap();
        let g = snap_tau(minus.tau, 7).unwrap();
        assert_eq!((g.a, g.b, g.c), (2, 1, 1));
        assert!((plus.z * plus.z).norm() > 0.0);
    }

    #[test]
    fn w_branch_changes_sheet() {
        // cw2: the minus branch passes the elliptic point of X0(2)+ and lands on the Fricke image
        let m = track_branch(SeriesFamily::W, Sign::Minus, -1.0 / 108.0, -49.0 / 12.0, PATH_DELTA).unwrap();
        let f = snap_tau(m.tau, 168).unwrap();
        assert_eq!(f.d(), 168);
        let principal = (1.0 - fast::hauptmodul(CurveTag::X0_2Plus, f.root_f64()).unwrap()).sqrt();
        assert!((m.sqrt_one_minus_t + principal).norm() < 1e-6, "{:?} {:?}", m.sqrt_one_minus_t, principal);
    }

    #[test]
    fn snap_rejects_generic() {
        assert!(snap_tau(c(0.1234, 0.8765), 7).is_none());
        let f = snap_tau(c(3.25, 7f64.sqrt() / 4.0), 7).unwrap();
        assert_eq!((f.a, f.b), (2, -1));
    }
}
