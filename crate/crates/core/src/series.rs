//! Binomial coefficient sums and the four series families.

use crate::error::{Error, Result};
use crate::hypergeom::gauss_2f1;
use crate::numerics::PrecisionContext;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeriesFamily {
    P,
    W,
    U,
    V,
}

impl SeriesFamily {
    /// U and V have no modular parameterization; reports on them are evidence only.
    pub fn evidence_only(self) -> bool {
        matches!(self, SeriesFamily::U | SeriesFamily::V)
    }
}

impl fmt::Display for SeriesFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SeriesFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(SeriesFamily::P),
            "W" | "w" => Ok(SeriesFamily::W),
            "U" | "u" => Ok(SeriesFamily::U),
            "V" | "v" => Ok(SeriesFamily::V),
            _ => Err(Error::Parse(format!("unknown family {s}"))),
        }
    }
}

fn binom(n: u32, k: u32) -> Integer {
    Integer::from(n).binomial(k)
}

/// n-th coefficient a_n(x) by the direct sum over k, outer C(2n,n) included for P, U, V.
pub fn inner_coefficient(family: SeriesFamily, n: u32, x: &Rational) -> Rational {
    let mut s = Rational::new();
    for k in 0..=n {
        let m = n - k;
        let term = match family {
            SeriesFamily::P => {
                let c = binom(2 * k, k).square() * binom(2 * m, m);
                Rational::from(c) * Rational::from(x.pow(m as i32))
            }
            SeriesFamily::W => {
                let c = binom(n, k) * binom(n + k, k) * binom(2 * k, k) * binom(2 * m, m);
                Rational::from(c) * Rational::from(x.pow(k as i32))
            }
            SeriesFamily::U => {
                let c = binom(n, k) * binom(n + 2 * k, 2 * k) * binom(2 * k, k);
                Rational::from(c) * Rational::from(x.pow(m as i32))
            }
            SeriesFamily::V => {
                let c = binom(2 * k, k).square() * binom(2 * m, m).square();
                Rational::from((c, binom(n, k))) * Rational::from(x.pow(k as i32))
            }
        };
        s += term;
    }
    match family {
        SeriesFamily::W => s,
        _ => s * binom(2 * n, n),
    }
}

/// Exact coefficient stream a_0, a_1, ... for one family and x.
pub struct Coefficients {
    family: SeriesFamily,
    x: Rational,
    p: Integer,
    q: Integer,
    n: u32,
    // P recurrence state e_{n-1}, e_{n-2}, e_{n-3} with e_n = q^n * inner sum
    e: [Integer; 3],
    qpow: Integer,
    central: Integer,
}

impl Coefficients {
    pub fn new(family: SeriesFamily, x: &Rational) -> Self {
        Coefficients {
            family,
            x: x.clone(),
            p: x.numer().clone(),
            q: x.denom().clone(),
            n: 0,
            e: [Integer::new(), Integer::new(), Integer::new()],
            qpow: Integer::from(1),
            central: Integer::from(1),
        }
    }

    fn p_next(&mut self, n: u32) -> Integer {
        let (p, q) = (&self.p, &self.q);
        let e_n = match n {
            0 => Integer::from(1),
            1 => Integer::from(2 * p) + Integer::from(4 * q),
            2 => {
                let inner = inner_coefficient(SeriesFamily::P, 2, &self.x) / Rational::from(binom(4, 2));
                let v = inner * Rational::from(q.square_ref());
                v.numer().clone()
            }
            _ => {
                let n1 = Integer::from(n - 1);
                let n2 = Integer::from(n - 2);
                let qa = (Integer::from(8 * p) + Integer::from(16 * q)) * n1.clone().square()
                    + (Integer::from(4 * p) + Integer::from(16 * q)) * &n1
                    + Integer::from(2 * p)
                    + Integer::from(4 * q);
                let pp = Integer::from(p.square_ref());
                let pq = Integer::from(p * q);
                let qb = (Integer::from(16 * &pp) + Integer::from(128 * &pq)) * n2.clone().square()
                    + (Integer::from(16 * &pp) + Integer::from(192 * &pq)) * &n2
                    + Integer::from(4 * &pp)
                    + Integer::from(96 * &pq);
                let c3 = Integer::from(256 * &pp) * q * n2.square();
                let r = qa * &self.e[0] - qb * &self.e[1] + c3 * &self.e[2];
                let nn = Integer::from(n) * n;
                r.div_exact(&nn)
            }
        };
        self.e.rotate_right(1);
        self.e[0] = e_n.clone();
        e_n
    }

    /// Integer-scaled inner sum by term-ratio stepping (q^n * sum for W and U).
    fn stepped_inner(&self, n: u32) -> Rational {
        let (p, q) = (&self.p, &self.q);
        let nz = |v: u32| Integer::from(v);
        match self.family {
            SeriesFamily::W => {
                let mut term = binom(2 * n, n) * Integer::from(q.pow(n));
                let mut s = term.clone();
                for k in 0..n {
                    let num = nz(n - k).square() * nz(n + k + 1) * nz(2 * k + 1);
                    let den = nz(k + 1).pow(3) * nz(2 * n - 2 * k - 1);
                    term = (term * num * p).div_exact(&(den * q));
                    s += &term;
                }
                Rational::from((s, Integer::from(q.pow(n))))
            }
            SeriesFamily::U => {
                let mut term = Integer::from(p.pow(n));
                let mut s = term.clone();
                for k in 0..n {
                    let num = nz(n - k) * nz(n + 2 * k + 1) * nz(n + 2 * k + 2);
                    let den = nz(k + 1).pow(3);
                    term = (term * num * q).div_exact(&(den * p));
                    s += &term;
                }
                Rational::from((s, Integer::from(q.pow(n))))
            }
            SeriesFamily::V => {
                let mut term = Rational::from(binom(2 * n, n).square());
                let mut s = term.clone();
                for k in 0..n {
                    let m = n - k;
                    let num = nz(2 * k + 1).square() * nz(m);
                    let den = nz(k + 1) * nz(2 * m - 1).square();
                    term *= Rational::from((num, den)) * &self.x;
                    s += &term;
                }
                s
            }
            SeriesFamily::P => unreachable!(),
        }
    }
}

impl Coefficients {
    // advances the shared state; P returns e_n, the others the exact coefficient
    fn step(&mut self) -> std::result::Result<Integer, Rational> {
        let n = self.n;
        if n > 0 {
            // C(2n,n) = C(2n-2,n-1) * 2(2n-1)/n
            self.central = Integer::from(&self.central * (2 * (2 * n - 1))).div_exact(&Integer::from(n));
            self.qpow *= &self.q;
        }
        self.n += 1;
        if self.p == 0 && self.family != SeriesFamily::P {
            return Err(inner_coefficient(self.family, n, &self.x));
        }
        match self.family {
            SeriesFamily::P => Ok(self.p_next(n)),
            SeriesFamily::W => Err(self.stepped_inner(n)),
            SeriesFamily::U | SeriesFamily::V => Err(self.stepped_inner(n) * &self.central),
        }
    }

    /// Next coefficient rounded to `prec` bits, skipping the exact rational for P.
    pub fn next_float(&mut self, prec: u32) -> Float {
        match self.step() {
            Ok(e) => {
                let num = Float::with_val(prec, &e) * Float::with_val(prec, &self.central);
                num / Float::with_val(prec, &self.qpow)
            }
            Err(a) => Float::with_val(prec, &a),
        }
    }
}

impl Iterator for Coefficients {
    type Item = Rational;
    fn next(&mut self) -> Option<Rational> {
        Some(match self.step() {
            Ok(e) => Rational::from((e * &self.central, self.qpow.clone())),
            Err(a) => a,
        })
    }
}

const WINDOW: usize = 20;
const RATIO_GUARD: f64 = 0.999;
const MAX_TERMS: usize = 400_000;

/// Sums of a_n t^n and n a_n t^n with the stopping rule and tail estimate.
#[derive(Clone, Debug)]
pub struct SeriesSums {
    pub gf: Float,
    pub tdgf: Float,
    pub terms_used: usize,
    pub tail_bound: Float,
    pub max_ratio: f64,
}

impl SeriesSums {
    pub fn value(&self, b: &Rational) -> Float {
        Float::with_val(self.gf.prec(), &self.tdgf + Float::with_val(self.gf.prec(), b * &self.gf))
    }
}

struct Partial {
    gf: Float,
    tdgf: Float,
    terms: usize,
}

/// Sums up to the stopping rule, then 25% more terms; returns (at stop, after extension).
fn raw_sums(family: SeriesFamily, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<(Partial, SeriesSums)> {
    let p = ctx.prec();
    let eps = ctx.eps();
    let tf = ctx.rational(t);
    let mut coeffs = Coefficients::new(family, x);
    let mut tpow = Float::with_val(p, 1);
    let mut gf = Float::with_val(p, 0);
    let mut tdgf = Float::with_val(p, 0);
    let mut mags: Vec<f64> = Vec::new();
    let mut small_run = 0usize;
    let mut max_ratio = 0f64;
    let mut first: Option<Partial> = None;
    let mut target = usize::MAX;
    for n in 0.. {
        let term = coeffs.next_float(p) * &tpow;
        let nterm = Float::with_val(p, &term * n as u32);
        gf += &term;
        tdgf += &nterm;
        let mag = Float::with_val(p, term.abs_ref()).max(&Float::with_val(p, nterm.abs_ref()));
        mags.push(crate::numerics::log10_abs(&mag));
        let scale = Float::with_val(p, gf.abs_ref()).max(&Float::with_val(p, tdgf.abs_ref()));
        if mag < Float::with_val(p, &eps * &scale) {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if let Some(r) = window_ratio(&mags) {
            max_ratio = r;
            if mags.len() >= 10 * WINDOW && r > RATIO_GUARD {
                return Err(Error::NotConvergent(format!(
                    "series not convergent at (t, x) = ({t}, {x}): term ratio {r:.4}"
                )));
            }
        }
        if first.is_none() && small_run >= WINDOW {
            first = Some(Partial { gf: gf.clone(), tdgf: tdgf.clone(), terms: n + 1 });
            target = n + 1 + (n + 1) / 4;
        }
        if n + 1 >= target {
            break;
        }
        if n + 1 >= MAX_TERMS {
            return Err(Error::NotConvergent(format!("no convergence within {MAX_TERMS} terms at (t, x) = ({t}, {x})")));
        }
        tpow *= &tf;
    }
    let first = first.expect("loop exits only after the stopping rule");
    let r = max_ratio.max(window_ratio(&mags).unwrap_or(0.0));
    // inflate the gap to 1 rather than r itself so ratios near 1 keep a finite bound
    let inflated = 1.0 - (1.0 - r) / 1.1;
    let last = mags.last().copied().unwrap_or(f64::NEG_INFINITY);
    let tail_log = last + (inflated / (1.0 - inflated)).log10();
    let tail_bound = if tail_log.is_finite() {
        Float::with_val(p, 10f64).pow(Float::with_val(p, tail_log))
    } else {
        Float::with_val(p, 0)
    };
    let terms_used = mags.len();
    Ok((first, SeriesSums { gf, tdgf, terms_used, tail_bound, max_ratio: r }))
}

/// Max over trailing windows of (M_j / M_{j-1})^(1/WINDOW), M_j the largest term in window j.
fn window_ratio(mags: &[f64]) -> Option<f64> {
    let n = mags.len();
    if n < 2 * WINDOW {
        return None;
    }
    let win_max = |lo: usize| mags[lo..lo + WINDOW].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cur = win_max(n - WINDOW);
    let prev = win_max(n - 2 * WINDOW);
    if !cur.is_finite() || !prev.is_finite() {
        return Some(0.0);
    }
    Some(10f64.powf((cur - prev) / WINDOW as f64))
}

/// Sums with the 25%-more-terms recheck.
pub fn series_sums(family: SeriesFamily, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<SeriesSums> {
    if *t == 0 {
        let p = ctx.prec();
        return Ok(SeriesSums {
            gf: Float::with_val(p, 1),
            tdgf: Float::with_val(p, 0),
            terms_used: 1,
            tail_bound: Float::with_val(p, 0),
            max_ratio: 0.0,
        });
    }
    let (first, second) = raw_sums(family, t, x, ctx)?;
    let p = ctx.prec();
    let scale = Float::with_val(p, second.gf.abs_ref()).max(&Float::with_val(p, second.tdgf.abs_ref())).max(&Float::with_val(p, 1));
    let d1 = Float::with_val(p, &first.gf - &second.gf).abs();
    let d2 = Float::with_val(p, &first.tdgf - &second.tdgf).abs();
    let tol = Float::with_val(p, ctx.tol(0) * &scale);
    if d1 > tol || d2 > tol {
        return Err(Error::NotConvergent(format!(
            "recheck with {} terms disagrees with {} terms at (t, x) = ({t}, {x})",
            second.terms_used, first.terms
        )));
    }
    let tail = Float::with_val(p, &second.tail_bound).max(&d1).max(&d2);
    Ok(SeriesSums { tail_bound: tail, ..second })
}

/// sum a_n (n + b) t^n.
pub fn series_value(family: SeriesFamily, t: &Rational, x: &Rational, b: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    Ok(series_sums(family, t, x, ctx)?.value(b))
}

/// The b-free generating function sum a_n t^n (P or W).
pub fn gf_value(family: SeriesFamily, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    if family.evidence_only() {
        return Err(Error::Domain(format!("gf_value is defined for P and W only, not {family}")));
    }
    Ok(series_sums(family, t, x, ctx)?.gf)
}

/// Termwise t P'(t;x).
pub fn gf_t_derivative(family: SeriesFamily, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    Ok(series_sums(family, t, x, ctx)?.tdgf)
}

/// Product-route value Z+ Z- h (P) or F(f+) F(f-) h (W) with principal 2F1 at the principal arguments.
pub fn product_route(family: SeriesFamily, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<Complex> {
    let p = ctx.prec();
    match family {
        SeriesFamily::P => {
            let (zp, zm) = crate::verifier::args::compute_z_pm(t, x, ctx)?;
            let a = Rational::from((1, 4));
            let one = Rational::from(1);
            let h = crate::verifier::args::compute_h(family, t, x, ctx)?;
            Ok(gauss_2f1(&a, &a, &one, &zp, ctx)? * gauss_2f1(&a, &a, &one, &zm, ctx)? * h)
        }
        SeriesFamily::W => {
            let (fp, fm) = crate::verifier::args::compute_f_pm(t, x, ctx)?;
            let a = Rational::from((1, 8));
            let b = Rational::from((3, 8));
            let one = Rational::from(1);
            let h = crate::verifier::args::compute_h(family, t, x, ctx)?;
            Ok(Complex::with_val(p, gauss_2f1(&a, &b, &one, &fp, ctx)? * gauss_2f1(&a, &b, &one, &fm, ctx)?) * h)
        }
        _ => Err(Error::Domain(format!("no product decomposition for family {family}"))),
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub deviations: Vec<Float>,
    pub max_deviation: Float,
}

/// |gf_value - product route| over the samples.
pub fn decomposition_check(family: SeriesFamily, samples: &[(Rational, Rational)], ctx: &PrecisionContext) -> Result<DecompositionReport> {
    let p = ctx.prec();
    let mut deviations = Vec::with_capacity(samples.len());
    let mut max_deviation = Float::with_val(p, 0);
    for (t, x) in samples {
        let direct = gf_value(family, t, x, ctx)?;
        let prod = product_route(family, t, x, ctx)?;
        let dev = crate::numerics::cabs(&Complex::with_val(p, &prod - &direct));
        if dev > max_deviation {
            max_deviation = dev.clone();
        }
        deviations.push(dev);
    }
    Ok(DecompositionReport { deviations, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn small_coefficients() {
        assert_eq!(inner_coefficient(SeriesFamily::P, 0, &q(3, 5)), 1);
        assert_eq!(inner_coefficient(SeriesFamily::P, 1, &q(9, 4)), 17);
        for x in [q(1, 3), q(-7, 2), q(5, 1)] {
            let expect = Rational::from(&x * 4) + 2;
            assert_eq!(inner_coefficient(SeriesFamily::W, 1, &x), expect);
        }
    }

    #[test]
    fn streams_match_direct_sums() {
        for fam in [SeriesFamily::P, SeriesFamily::W, SeriesFamily::U, SeriesFamily::V] {
            for x in [q(9, 4), q(-14, 1), q(-49, 12), q(5, 1), q(-27, 8), q(0, 1)] {
                for (n, a) in Coefficients::new(fam, &x).take(61).enumerate() {
                    assert_eq!(a, inner_coefficient(fam, n as u32, &x), "{fam} n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn trivial_values() {
        let ctx = PrecisionContext::new(30).unwrap();
        let v = series_value(SeriesFamily::P, &q(0, 1), &q(2, 1), &q(1, 3), &ctx).unwrap();
        assert_eq!(v, Float::with_val(ctx.prec(), &q(1, 3)));
        assert_eq!(gf_value(SeriesFamily::P, &q(0, 1), &q(7, 1), &ctx).unwrap(), 1);
    }

    #[test]
    fn cp1_value() {
        let ctx = PrecisionContext::new(60).unwrap();
        let v = series_value(SeriesFamily::P, &q(1, 100), &q(9, 4), &q(1, 12), &ctx).unwrap();
        let expect = Float::with_val(ctx.prec(), 75) / (Float::with_val(ctx.prec(), 48) * crate::numerics::const_pi(&ctx));
        let diff = Float::with_val(ctx.prec(), &v - &expect).abs();
        assert!(diff < ctx.tol(15), "{}", diff);
    }

    #[test]
    fn divergence_guard() {
        let ctx = PrecisionContext::new(30).unwrap();
        let r = series_value(SeriesFamily::P, &q(1, 10), &q(9, 4), &q(0, 1), &ctx);
        assert!(matches!(r, Err(Error::NotConvergent(_))));
    }
}
