//! Coset systems for Gamma0(2), the weight-2 slash, and exact evaluation of B(tau0) and
//! Y(tau+)/Y(tau-) through the degree-2 modular polynomials Psi and Xi.
//!
//! Only m = 2 polynomial data is embedded. Other determinants fall back to numeric values
//! plus recognition.

use crate::algebra::surd::squarefree_split;
use crate::algebra::{recognize_complex_surd, QuadSurd, DEFAULT_DENOM_BOUND};
use crate::cm::{CMPoint, QuadraticForm};
use crate::error::{Error, Result};
use crate::modular::{CurveTag, ModularData};
use crate::numerics::{cabs, cdist, principal_sqrt, PrecisionContext};
use rug::{Complex, Float, Integer, Rational};
use std::fmt;

/// Root acceptance and rejection rings for root selection.
pub const ROOT_ACCEPT: f64 = 1e-25;
pub const ROOT_REJECT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMatrix2 {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMatrix2 { a, b, c, d }
    }

    pub const fn identity() -> Self {
        IntMatrix2::new(1, 0, 0, 1)
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Self) -> Self {
        IntMatrix2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn adjugate(&self) -> Self {
        IntMatrix2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn in_gamma0_2(&self) -> bool {
        self.det() == 1 && self.c % 2 == 0
    }

    fn max_entry(&self) -> i64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// c tau + d
    pub fn j_factor(&self, tau: &Complex, ctx: &PrecisionContext) -> Complex {
        Complex::with_val(ctx.prec(), tau * self.c) + self.d
    }

    pub fn act(&self, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
        let p = ctx.prec();
        let den = self.j_factor(tau, ctx);
        if den.is_zero() {
            return Err(Error::Domain(format!("{self} sends tau to the cusp")));
        }
        let num = Complex::with_val(p, tau * self.a) + self.b;
        Ok(num / den)
    }

    /// True when gamma maps the root of `from` onto the root of `to`. Exact: the pulled-back
    /// quadratic must be proportional to `from`; det > 0 keeps the upper half-plane root.
    pub fn maps_form(&self, from: &QuadraticForm, to: &QuadraticForm) -> bool {
        if self.det() <= 0 {
            return false;
        }
        let (ta, tb, tc) = (to.a as i128, to.b as i128, to.c as i128);
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        let p2 = ta * a * a + tb * a * c + tc * c * c;
        let p1 = 2 * ta * a * b + tb * (a * d + b * c) + 2 * tc * c * d;
        let p0 = ta * b * b + tb * b * d + tc * d * d;
        let (fa, fb, fc) = (from.a as i128, from.b as i128, from.c as i128);
        p2 != 0 && p2 * fb == p1 * fa && p2 * fc == p0 * fa
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// g ~ h under left multiplication by Gamma0(2).
pub fn gamma0_2_equivalent(g: &IntMatrix2, h: &IntMatrix2) -> bool {
    let m = h.det();
    if m == 0 || g.det() != m {
        return false;
    }
    let p = g.mul(&h.adjugate());
    [p.a, p.b, p.c, p.d].iter().all(|e| e % m == 0)
        && IntMatrix2::new(p.a / m, p.b / m, p.c / m, p.d / m).in_gamma0_2()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetKind {
    /// det m square-free, 2 | C, A odd
    M2Prime,
    /// det m, 2 | C
    M2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSystem {
    pub m: u32,
    pub kind: CosetKind,
    pub reps: Vec<IntMatrix2>,
}

impl CosetSystem {
    pub fn class_of(&self, g: &IntMatrix2) -> Option<usize> {
        self.reps.iter().position(|r| gamma0_2_equivalent(g, r))
    }

    /// Same system with g representing its own class, moved to the front.
    pub fn anchored(&self, g: &IntMatrix2) -> Result<CosetSystem> {
        let i = self.class_of(g).ok_or_else(|| Error::Domain(format!("{g} is not in this coset system")))?;
        let mut reps = self.reps.clone();
        reps.remove(i);
        reps.insert(0, *g);
        Ok(CosetSystem { m: self.m, kind: self.kind, reps })
    }
}

/// Representatives that replace the Hermite choice of their class.
const ANCHORS: [(CosetKind, IntMatrix2); 1] = [(CosetKind::M2Prime, IntMatrix2::new(1, -1, 2, 0))];

fn divisor_sum(m: u32) -> u32 {
    (1..=m).filter(|k| m.is_multiple_of(*k)).sum()
}

/// Right cosets Gamma0(2) \ M, built as {I, S, ST} x (Hermite forms of det m) filtered by the
/// congruence conditions of `kind`.
pub fn cosets(kind: CosetKind, m: u32) -> Result<CosetSystem> {
    if m == 0 {
        return Err(Error::Domain("determinant must be positive".into()));
    }
    if kind == CosetKind::M2Prime && !crate::algebra::surd::is_squarefree(m as i64) {
        return Err(Error::Domain(format!("m = {m} is not square-free")));
    }
    let mi = m as i64;
    let mut hermite = Vec::new();
    for a in 1..=mi {
        if mi % a == 0 {
            let d = mi / a;
            for b in 0..d {
                hermite.push(IntMatrix2::new(a, b, 0, d));
            }
        }
    }
    let left = [IntMatrix2::identity(), IntMatrix2::new(0, -1, 1, 0), IntMatrix2::new(0, -1, 1, 1)];
    let all: Vec<IntMatrix2> = left.iter().flat_map(|l| hermite.iter().map(move |h| l.mul(h))).collect();
    // Gamma0(2) has index 3 in SL2(Z), so Gamma0(2) \ M(m) has 3 sigma(m) classes
    let distinct = all.iter().enumerate().all(|(i, g)| all[..i].iter().all(|h| !gamma0_2_equivalent(g, h)));
    if !distinct || all.len() as u32 != 3 * divisor_sum(m) {
        return Err(Error::Internal(format!("coset enumeration for m = {m} is incomplete")));
    }
    let mut reps: Vec<IntMatrix2> = all
        .into_iter()
        .filter(|g| g.c % 2 == 0 && (kind == CosetKind::M2 || g.a % 2 != 0))
        .collect();
    let mut front = Vec::new();
    for (k, anchor) in ANCHORS {
        if k != kind || anchor.det() != mi {
            continue;
        }
        if let Some(i) = reps.iter().position(|r| gamma0_2_equivalent(&anchor, r)) {
            reps.remove(i);
            front.push(anchor);
        }
    }
    front.extend(reps);
    Ok(CosetSystem { m, kind, reps: front })
}

/// Weight-2 slash with determinant normalization: m (C tau + D)^-2 F(gamma tau).
pub fn slash2(value_at_gamma_tau: &Complex, g: &IntMatrix2, tau: &Complex, ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    let j = g.j_factor(tau, ctx);
    let j2 = Complex::with_val(p, j.square_ref());
    Complex::with_val(p, value_at_gamma_tau * g.det()) / j2
}

fn level2(tau: &Complex, ctx: &PrecisionContext) -> Result<ModularData> {
    ModularData::at(CurveTag::X0_2, tau, ctx)
}

/// f|_2 gamma at tau.
pub fn f_slash(g: &IntMatrix2, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let gt = g.act(tau, ctx)?;
    Ok(slash2(&level2(&gt, ctx)?.quasi_f(ctx), g, tau, ctx))
}

/// xi_gamma(tau) = (y|_2 gamma)(tau) / y(tau) with y = DT = (1/2 pi i) dT/dtau.
pub fn xi_gamma(g: &IntMatrix2, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let here = level2(tau, ctx)?;
    let there = level2(&g.act(tau, ctx)?, ctx)?;
    Ok(slash2(&there.dt, g, tau, ctx) / here.dt)
}

/// A rational function num(T)/den(T) with integer coefficients, ascending powers.
struct RatFn {
    num: &'static [i64],
    den: &'static [i64],
}

impl RatFn {
    fn eval(&self, t: &Complex, ctx: &PrecisionContext) -> Complex {
        let p = ctx.prec();
        let horner = |cs: &[i64]| {
            let mut acc = Complex::new(p);
            for c in cs.iter().rev() {
                acc = Complex::with_val(p, &acc * t) + *c;
            }
            acc
        };
        horner(self.num) / horner(self.den)
    }

    fn eval_exact(&self, t: &QuadSurd) -> Result<QuadSurd> {
        let horner = |cs: &[i64]| -> Result<QuadSurd> {
            let mut acc = QuadSurd::rational(Rational::new());
            for c in cs.iter().rev() {
                acc = acc.mul(t)?.add(&QuadSurd::rational(Rational::from(*c)))?;
            }
            Ok(acc)
        };
        horner(self.num)?.div(&horner(self.den)?)
    }
}

/// Psi for m = 2: X^2 + T/4 (the linear coefficient vanishes).
const PSI_M2: [RatFn; 2] = [RatFn { num: &[0, 1], den: &[4] }, RatFn { num: &[0], den: &[1] }];

const D_T4_T1: &[i64] = &[0, 0, 0, 0, -256, 256];
/// Xi for m = 2, constant term first.
const XI_M2: [RatFn; 5] = [
    RatFn { num: &[-8, -65, -8], den: &[0, 0, 0, 0, 16, -32, 16] },
    RatFn { num: &[-256, -1792, 2072, -93, -12], den: &[0, 0, 0, 0, 0, 16, -32, 16] },
    RatFn { num: &[-12288, 45064, -32767, -384, 976, 128], den: D_T4_T1 },
    RatFn { num: &[256, -256, 0, -4088, -32767], den: D_T4_T1 },
    RatFn { num: &[-48, 128], den: &[1] },
];

/// Monic polynomial with exact coefficients in one quadratic field, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdPoly {
    pub coeffs: Vec<QuadSurd>,
}

impl SurdPoly {
    fn monic(lower: &[RatFn], t: &QuadSurd) -> Result<SurdPoly> {
        let mut coeffs = lower.iter().map(|r| r.eval_exact(t)).collect::<Result<Vec<_>>>()?;
        coeffs.push(QuadSurd::rational(Rational::from(1)));
        Ok(SurdPoly { coeffs })
    }

    pub fn psi_m2(t: &QuadSurd) -> Result<SurdPoly> {
        SurdPoly::monic(&PSI_M2, t)
    }

    pub fn xi_m2(t: &QuadSurd) -> Result<SurdPoly> {
        SurdPoly::monic(&XI_M2, t)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval_exact(&self, x: &QuadSurd) -> Result<QuadSurd> {
        let mut acc = QuadSurd::rational(Rational::new());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x)?.add(c)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &Complex, ctx: &PrecisionContext) -> Complex {
        let p = ctx.prec();
        let mut acc = Complex::new(p);
        for c in self.coeffs.iter().rev() {
            acc = Complex::with_val(p, &acc * x) + c.eval(ctx);
        }
        acc
    }

    /// All roots by Durand-Kerner iteration at working precision.
    pub fn roots(&self, ctx: &PrecisionContext) -> Result<Vec<Complex>> {
        let p = ctx.prec();
        let n = self.degree();
        let cs: Vec<Complex> = self.coeffs.iter().map(|c| c.eval(ctx)).collect();
        let bound = cs[..n].iter().map(cabs).fold(Float::with_val(p, 1), |m, a| m.max(&a)) + 1u32;
        let seed = Complex::with_val(p, (0.4, 0.9));
        let mut z = Vec::with_capacity(n);
        let mut w = Complex::with_val(p, &bound);
        for _ in 0..n {
            w *= &seed;
            z.push(w.clone());
        }
        let tol = ctx.eps() * &bound;
        for _ in 0..2000 {
            let mut worst = Float::new(p);
            for i in 0..n {
                let mut den = Complex::with_val(p, 1);
                for j in 0..n {
                    if i != j {
                        den *= Complex::with_val(p, &z[i] - &z[j]);
                    }
                }
                if den.is_zero() {
                    return Err(Error::RootSelection("coincident root estimates".into()));
                }
                let step = self.eval(&z[i], ctx) / den;
                let s = cabs(&step);
                if s > worst {
                    worst = s;
                }
                z[i] -= step;
            }
            if worst <= tol {
                return Ok(z);
            }
        }
        Err(Error::RootSelection("polynomial roots did not converge".into()))
    }
}

impl fmt::Display for SurdPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                _ if c.a == 1 && c.b == 0 => write!(f, "X^{k}")?,
                _ => write!(f, "({c})*X^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Index of the root nearest `target`. It must sit inside the acceptance ring, and every
/// other root must be outside the rejection ring.
pub fn select_root(roots: &[Complex], target: &Complex, ctx: &PrecisionContext) -> Result<usize> {
    let p = ctx.prec();
    let scale = Float::with_val(p, cabs(target)).max(&Float::with_val(p, 1));
    let dist: Vec<f64> = roots.iter().map(|r| (cdist(r, target) / &scale).to_f64()).collect();
    let (best, bd) = dist
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, d)| (i, *d))
        .ok_or_else(|| Error::RootSelection("no roots".into()))?;
    if bd > ROOT_ACCEPT {
        return Err(Error::RootSelection(format!("nearest root is {bd:.3e} away")));
    }
    if dist.iter().enumerate().any(|(i, d)| i != best && *d < ROOT_REJECT) {
        return Err(Error::RootSelection("two roots are indistinguishable at this precision".into()));
    }
    Ok(best)
}

/// tau of a form as a+b*sqrt(-s).
pub fn tau_surd(form: &QuadraticForm) -> Result<QuadSurd> {
    let (k, s) = squarefree_split(&Integer::from(form.d()));
    let two_a = 2 * form.a;
    QuadSurd::new(Rational::from((-form.b, two_a)), Rational::from(k) / two_a, -s.to_i64().unwrap())
}

/// Quadratic fields tried for T at a CM point of discriminant -disc: Q(sqrt(-s)) with s the
/// square-free part, then Q(sqrt(k)) and Q(sqrt(-k)) for square-free k built from primes of disc.
pub fn candidate_fields(disc: u32) -> Vec<i64> {
    let (_, s) = squarefree_split(&Integer::from(disc));
    let s = s.to_i64().unwrap();
    let primes: Vec<i64> = (2..=disc as i64).filter(|p| disc as i64 % p == 0 && (2..*p).all(|q| p % q != 0)).collect();
    let mut ks: Vec<i64> = (1u32..1 << primes.len())
        .map(|mask| primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p).product())
        .collect();
    ks.sort();
    let mut out = vec![-s];
    out.extend(ks.iter().copied());
    out.extend(ks.iter().map(|k| -k).filter(|k| *k != -s));
    out
}

/// Recognize v as a + b sqrt(d).
pub fn recognize_quad(v: &Complex, d: i64, ctx: &PrecisionContext) -> Result<QuadSurd> {
    let k = d.unsigned_abs();
    let (re, im): (&[u64], &[u64]) = if d < 0 { (&[], &[k]) } else { (&[k], &[]) };
    let z = recognize_complex_surd(v, re, im, DEFAULT_DENOM_BOUND, ctx)?;
    let q = QuadSurd::from_complex_surd(&z).ok_or_else(|| Error::NotRecognized(format!("{z} is not in Q(sqrt({d}))")))?;
    let d = if q.b == 0 { 1 } else { d };
    QuadSurd::new(q.a, q.b, d)
}

/// Recognize over the candidate fields of the discriminant, trying `prefer` first. A value
/// already known to share a field with T should not get a chance at a spurious smaller field.
fn recognize_at(v: &Complex, disc: u32, prefer: Option<i64>, ctx: &PrecisionContext) -> Result<QuadSurd> {
    let mut fields: Vec<i64> = prefer.filter(|d| *d != 1).into_iter().collect();
    fields.extend(candidate_fields(disc).into_iter().filter(|d| Some(*d) != prefer));
    let mut last = None;
    for d in fields {
        match recognize_quad(v, d, ctx) {
            Ok(q) => return Ok(q),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::NotRecognized("no candidate field".into())))
}

fn rel_close(a: &Complex, b: &Complex, loss: u32, ctx: &PrecisionContext) -> bool {
    let p = ctx.prec();
    cdist(a, b) <= ctx.tol(loss) * Float::with_val(p, cabs(b)).max(&Float::with_val(p, 1))
}

/// gamma with gamma tau0 = tau0 in M2'(m), m <= max_det, ordered by determinant then size.
/// Writing the form as [a0,b0,c0] and D = 4 a0 c0 - b0^2, every fixing matrix is
/// [[(s - k b0)/2, -k c0], [k a0, (s + k b0)/2]] with det (s^2 + k^2 D)/4.
pub fn fixing_matrices(form: &QuadraticForm, max_det: i64) -> Vec<IntMatrix2> {
    let dd = form.d() as i64;
    let mut out = Vec::new();
    let mut k = 1i64;
    while k * k * dd <= 4 * max_det {
        let mut s = -2 * max_det;
        while s <= 2 * max_det {
            let n = s * s + k * k * dd;
            if n % 4 == 0 && (s - k * form.b) % 2 == 0 {
                let m = n / 4;
                let g = IntMatrix2::new((s - k * form.b) / 2, -k * form.c, k * form.a, (s + k * form.b) / 2);
                if m >= 1
                    && m <= max_det
                    && g.c % 2 == 0
                    && g.a % 2 != 0
                    && crate::algebra::surd::is_squarefree(m)
                    && g.max_entry() <= 2 * dd
                {
                    out.push(g);
                }
            }
            s += 1;
        }
        k += 1;
    }
    out.sort_by_key(|g| (g.det(), g.max_entry(), g.a, g.b, g.c, g.d));
    out
}

/// Determinant-minimal gamma in M2 (2 | C) with gamma tau_from = tau_to; ties go to the
/// smallest max |entry|.
pub fn relating_matrix(from: &QuadraticForm, to: &QuadraticForm) -> Option<IntMatrix2> {
    let bound = 2 * from.d().max(to.d()) as i64;
    for m in 1..=bound {
        let mut hits = Vec::new();
        for c in (0..=bound).step_by(2) {
            for a in -bound..=bound {
                for d in -bound..=bound {
                    if c == 0 {
                        if a * d != m || d <= 0 {
                            continue;
                        }
                        for b in -bound..=bound {
                            let g = IntMatrix2::new(a, b, 0, d);
                            if g.maps_form(from, to) {
                                hits.push(g);
                            }
                        }
                    } else if (a * d - m) % c == 0 {
                        let g = IntMatrix2::new(a, (a * d - m) / c, c, d);
                        if g.max_entry() <= bound && g.maps_form(from, to) {
                            hits.push(g);
                        }
                    }
                }
            }
        }
        if let Some(g) = hits.into_iter().min_by_key(|g| (g.max_entry(), g.a, g.b, g.c, g.d)) {
            return Some(g);
        }
    }
    None
}

/// Residuals |F1/Y + F2/Y| and |F1 F2 / Y^2 - T/4| for the m = 2 coset system.
pub fn psi_verify(tau: &Complex, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    let p = ctx.prec();
    let md = level2(tau, ctx)?;
    let f = md.quasi_f(ctx);
    let cs = cosets(CosetKind::M2Prime, 2)?;
    let mut fy = Vec::new();
    for g in &cs.reps {
        let fj = Complex::with_val(p, &f - f_slash(g, tau, ctx)?);
        fy.push(fj / &md.y);
    }
    let sum = Complex::with_val(p, &fy[0] + &fy[1]);
    let prod = Complex::with_val(p, &fy[0] * &fy[1]);
    let quarter_t = Complex::with_val(p, &md.t / 4u32);
    Ok((cabs(&sum), cdist(&prod, &quarter_t)))
}

#[derive(Clone, Debug)]
pub struct XiCheck {
    /// coefficients of prod (X - xi_gamma), constant term first
    pub from_cosets: Vec<Complex>,
    /// displayed rational functions of T at the same tau
    pub displayed: Vec<Complex>,
    /// max relative coefficient deviation
    pub max_deviation: Float,
}

pub fn xi_verify(tau: &Complex, ctx: &PrecisionContext) -> Result<XiCheck> {
    let p = ctx.prec();
    let cs = cosets(CosetKind::M2, 2)?;
    let xs = cs.reps.iter().map(|g| xi_gamma(g, tau, ctx)).collect::<Result<Vec<_>>>()?;
    // prod (X - x), ascending coefficients
    let mut poly = vec![Complex::with_val(p, 1)];
    for x in &xs {
        let mut next = vec![Complex::new(p); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= Complex::with_val(p, c * x);
        }
        poly = next;
    }
    let t = level2(tau, ctx)?.t;
    let mut displayed: Vec<Complex> = XI_M2.iter().map(|r| r.eval(&t, ctx)).collect();
    displayed.push(Complex::with_val(p, 1));
    let mut worst = Float::new(p);
    for (a, b) in poly.iter().zip(&displayed) {
        let rel = cdist(a, b) / Float::with_val(p, cabs(b)).max(&Float::with_val(p, 1));
        if rel > worst {
            worst = rel;
        }
    }
    Ok(XiCheck { from_cosets: poly, displayed, max_deviation: worst })
}

#[derive(Clone, Debug)]
pub struct BEvaluation {
    pub gamma: IntMatrix2,
    pub t: QuadSurd,
    pub psi: SurdPoly,
    /// F1(tau0)/Y(tau0) = root_sign * sqrt(root_square), principal sqrt
    pub root_square: QuadSurd,
    pub root_sign: i32,
    pub b: QuadSurd,
}

impl BEvaluation {
    pub fn root_string(&self) -> String {
        format!("{}sqrt({})", if self.root_sign < 0 { "-" } else { "" }, self.root_square)
    }
}

/// Exact B(tau0) from a fixing matrix of determinant 2.
pub fn evaluate_b_rigorous(tau0: &CMPoint, g: &IntMatrix2, ctx: &PrecisionContext) -> Result<BEvaluation> {
    let p = ctx.prec();
    if g.det() != 2 || g.c % 2 != 0 || g.a % 2 == 0 {
        return Err(Error::Domain(format!("{g} is not in M2'(2); only m = 2 is embedded")));
    }
    if !g.maps_form(&tau0.form, &tau0.form) {
        return Err(Error::Domain(format!("{g} does not fix {}", tau0.form.tau_string())));
    }
    let md = level2(&tau0.tau, ctx)?;
    let t = recognize_at(&md.t, tau0.d, None, ctx)?;
    if !rel_close(&t.eval(ctx), &md.t, 20, ctx) {
        return Err(Error::NotRecognized(format!("T(tau0) = {t} does not reproduce the value")));
    }
    let psi = SurdPoly::psi_m2(&t)?;
    let roots = psi.roots(ctx)?;

    // F1(tau0) = (1 - m / (c tau0 + d)^2) f(tau0)
    let j = g.j_factor(&tau0.tau, ctx);
    let j2 = Complex::with_val(p, j.square_ref());
    let factor = Complex::with_val(p, 1) - Complex::with_val(p, 2u32) / &j2;
    let numeric = Complex::with_val(p, &factor * md.quasi_f(ctx)) / &md.y;
    let root = roots[select_root(&roots, &numeric, ctx)?].clone();

    let root_square = t.mul(&QuadSurd::rational(Rational::from((-1, 4))))?;
    let principal = principal_sqrt(&root_square.eval(ctx), ctx);
    let root_sign = if cdist(&principal, &root) <= cdist(&Complex::with_val(p, -&principal), &root) { 1 } else { -1 };

    // B = (c tau0+d)^2 / ((c tau0+d)^2 - m) * X / sqrt(1 - T); square it to stay in the field
    let js = tau_surd(&tau0.form)?
        .mul(&QuadSurd::rational(Rational::from(g.c)))?
        .add(&QuadSurd::rational(Rational::from(g.d)))?
        .powu(2)?;
    let pref = js.div(&js.sub(&QuadSurd::rational(Rational::from(2)))?)?;
    let one_minus_t = QuadSurd::rational(Rational::from(1)).sub(&t)?;
    let b_square = pref.powu(2)?.mul(&root_square)?.div(&one_minus_t)?;

    let pref_num = pref.eval(ctx);
    let b_num = Complex::with_val(p, &pref_num * &root) / &md.sqrt_one_minus_t;
    if !rel_close(&b_num, &md.b(ctx), 20, ctx) {
        return Err(Error::RootSelection("selected root does not reproduce quasi_B".into()));
    }
    let b = recognize_at(&b_num, tau0.d, Some(t.d), ctx)?;
    if b.powu(2)? != b_square {
        return Err(Error::NotRecognized(format!("B = {b} does not square to {b_square}")));
    }
    Ok(BEvaluation { gamma: *g, t, psi, root_square, root_sign, b })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certification {
    /// gamma in Gamma0(2): xi = 1
    Trivial,
    /// xi is an exact root of the embedded Xi
    Polynomial,
    /// numeric xi recognized, no polynomial available for this determinant
    Numeric,
}

#[derive(Clone, Debug)]
pub struct YRatioEvaluation {
    pub gamma: IntMatrix2,
    pub xi: QuadSurd,
    pub ratio: QuadSurd,
    pub certification: Certification,
}

/// Exact Y(tau+)/Y(tau-) from gamma with tau+ = gamma tau-.
pub fn y_ratio_rigorous(tau_minus: &CMPoint, tau_plus: &CMPoint, g: &IntMatrix2, ctx: &PrecisionContext) -> Result<YRatioEvaluation> {
    let p = ctx.prec();
    if g.c % 2 != 0 || !g.maps_form(&tau_minus.form, &tau_plus.form) {
        return Err(Error::Domain(format!("{g} does not map {} to {}", tau_minus.form.tau_string(), tau_plus.form.tau_string())));
    }
    let m = g.det();
    let lo = level2(&tau_minus.tau, ctx)?;
    let hi = level2(&tau_plus.tau, ctx)?;
    let xi_num = slash2(&hi.dt, g, &tau_minus.tau, ctx) / &lo.dt;
    let tm = recognize_at(&lo.t, tau_minus.d, None, ctx)?;
    let tp = recognize_at(&hi.t, tau_plus.d, Some(tm.d), ctx)?;

    let (xi, certification) = if m == 1 {
        if !rel_close(&xi_num, &Complex::with_val(p, 1), 20, ctx) {
            return Err(Error::Internal("y is not Gamma0(2)-invariant".into()));
        }
        (QuadSurd::rational(Rational::from(1)), Certification::Trivial)
    } else if m == 2 {
        let xi_poly = SurdPoly::xi_m2(&tm)?;
        let roots = xi_poly.roots(ctx)?;
        let root = &roots[select_root(&roots, &xi_num, ctx)?];
        let xi = recognize_at(root, tau_minus.d, Some(tm.d), ctx)?;
        if !xi_poly.eval_exact(&xi)?.is_zero() {
            return Err(Error::NotRecognized(format!("xi = {xi} is not a root of Xi")));
        }
        (xi, Certification::Polynomial)
    } else {
        (recognize_at(&xi_num, tau_minus.d, Some(tm.d), ctx)?, Certification::Numeric)
    };

    // Y+/Y- = xi (c tau- + d)^2 / m * T- sqrt(1-T-) / (T+ sqrt(1-T+))
    let js = tau_surd(&tau_minus.form)?
        .mul(&QuadSurd::rational(Rational::from(g.c)))?
        .add(&QuadSurd::rational(Rational::from(g.d)))?
        .powu(2)?;
    let one = QuadSurd::rational(Rational::from(1));
    let lhs = xi.mul(&js)?.powu(2)?.mul(&tm.powu(2)?)?.mul(&one.sub(&tm)?)?;
    let rhs_den = tp.powu(2)?.mul(&one.sub(&tp)?)?.mul(&QuadSurd::rational(Rational::from(m * m)))?;
    let ratio_square = lhs.div(&rhs_den)?;

    let ratio_num = Complex::with_val(p, &hi.y / &lo.y);
    let via_xi = Complex::with_val(p, &xi.eval(ctx) * js.eval(ctx)) / m
        * Complex::with_val(p, &lo.t * &lo.sqrt_one_minus_t)
        / Complex::with_val(p, &hi.t * &hi.sqrt_one_minus_t);
    if !rel_close(&via_xi, &ratio_num, 20, ctx) {
        return Err(Error::Internal("xi does not reproduce Y(tau+)/Y(tau-)".into()));
    }
    let ratio = recognize_at(&ratio_num, tau_minus.d, Some(tm.d), ctx)?;
    if ratio.powu(2)? != ratio_square {
        return Err(Error::NotRecognized(format!("ratio {ratio} does not square to {ratio_square}")));
    }
    Ok(YRatioEvaluation { gamma: *g, xi, ratio, certification })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(60).unwrap()
    }

    fn m(a: i64, b: i64, c: i64, d: i64) -> IntMatrix2 {
        IntMatrix2::new(a, b, c, d)
    }

    fn quad(s: &str) -> QuadSurd {
        QuadSurd::parse(s).unwrap()
    }

    fn point(a: i64, b: i64, c: i64) -> CMPoint {
        CMPoint::from_form(QuadraticForm::new(a, b, c, 1).unwrap(), &ctx())
    }

    #[test]
    fn coset_systems() {
        let c = cosets(CosetKind::M2Prime, 2).unwrap();
        assert_eq!(c.reps, vec![m(1, -1, 2, 0), m(1, 0, 0, 2)]);
        let c = cosets(CosetKind::M2, 2).unwrap();
        assert_eq!(c.reps, vec![m(1, 0, 0, 2), m(1, 1, 0, 2), m(2, 0, 0, 1), m(0, -1, 2, 0), m(0, -1, 2, 1)]);
        assert_eq!(cosets(CosetKind::M2Prime, 1).unwrap().reps, vec![IntMatrix2::identity()]);
        assert!(cosets(CosetKind::M2Prime, 4).is_err());
        // [[1,-1],[2,0]] and the Hermite form [[1,1],[0,2]] share a class
        assert!(gamma0_2_equivalent(&m(1, -1, 2, 0), &m(1, 1, 0, 2)));
        for n in 1..8 {
            let c = cosets(CosetKind::M2, n).unwrap();
            for (i, g) in c.reps.iter().enumerate() {
                assert_eq!(g.det(), n as i64);
                assert!(c.reps[..i].iter().all(|h| !gamma0_2_equivalent(g, h)));
            }
        }
    }

    #[test]
    fn slash_basics() {
        let ctx = ctx();
        let tau = Complex::with_val(ctx.prec(), (0.3, 0.8));
        let v = Complex::with_val(ctx.prec(), (1.5, -2.0));
        assert_eq!(slash2(&v, &IntMatrix2::identity(), &tau, &ctx), v);
        // the cp1 fixing matrix fixes tau0 and slashes by 2/(2 tau0)^2
        let t0 = point(2, -1, 1);
        let g = m(1, -1, 2, 0);
        assert!(cdist(&g.act(&t0.tau, &ctx).unwrap(), &t0.tau) < ctx.tol(5));
        let two_tau = Complex::with_val(ctx.prec(), &t0.tau * 2u32);
        let want = Complex::with_val(ctx.prec(), 2u32) / Complex::with_val(ctx.prec(), two_tau.square_ref());
        assert!(cdist(&slash2(&Complex::with_val(ctx.prec(), 1), &g, &t0.tau, &ctx), &want) < ctx.tol(5));
    }

    #[test]
    fn cp1_fixing_and_relating_matrices() {
        let plus = QuadraticForm::new(2, -1, 1, 1).unwrap();
        let minus = QuadraticForm::new(2, 1, 1, 1).unwrap();
        assert_eq!(fixing_matrices(&plus, 2)[0], m(1, -1, 2, 0));
        assert_eq!(fixing_matrices(&minus, 2)[0], m(-1, -1, 2, 0));
        assert_eq!(relating_matrix(&minus, &plus), Some(m(0, -1, 2, 0)));
        // no fixing matrix of determinant 2 for D = 40
        assert!(fixing_matrices(&QuadraticForm::new(2, 0, 5, 1).unwrap(), 2).is_empty());
    }

    #[test]
    fn b_at_cp1_point() {
        let ctx = ctx();
        let e = evaluate_b_rigorous(&point(2, -1, 1), &m(1, -1, 2, 0), &ctx).unwrap();
        assert_eq!(e.t, quad("(47-45*sqrt(-7))/128"));
        assert_eq!(e.psi.coeffs[0], quad("(47-45*sqrt(-7))/512"));
        assert!(e.psi.coeffs[1].is_zero());
        assert_eq!(e.root_square, quad("(-47+45*sqrt(-7))/512"));
        assert_eq!(e.root_sign, -1);
        assert_eq!(e.b, quad("-1/4-sqrt(-7)/84"));
    }

    #[test]
    fn y_ratio_at_cp1() {
        let ctx = ctx();
        let e = y_ratio_rigorous(&point(2, 1, 1), &point(2, -1, 1), &m(0, -1, 2, 0), &ctx).unwrap();
        assert_eq!(e.certification, Certification::Polynomial);
        assert_eq!(e.xi, quad("(5983+2115*sqrt(-7))/8192"));
        assert_eq!(e.ratio, quad("(31-3*sqrt(-7))/32"));
        let id = y_ratio_rigorous(&point(2, 1, 1), &point(2, 1, 1), &IntMatrix2::identity(), &ctx).unwrap();
        assert_eq!(id.ratio, QuadSurd::rational(Rational::from(1)));
        assert_eq!(id.certification, Certification::Trivial);
    }

    #[test]
    fn xi_displayed_coefficients() {
        let ctx = ctx();
        let tau = Complex::with_val(ctx.prec(), (0.21, 0.9));
        let chk = xi_verify(&tau, &ctx).unwrap();
        assert!(chk.max_deviation < ctx.tol(20), "{}", chk.max_deviation);
        let t = level2(&tau, &ctx).unwrap().t;
        let x4 = Complex::with_val(ctx.prec(), &t * 128u32) - 48u32;
        assert!(cdist(&chk.from_cosets[4], &x4) < ctx.tol(20));
    }

    #[test]
    fn psi_cases() {
        let ctx = ctx();
        let p = ctx.prec();
        let tol = ctx.ten_pow(-45);
        let a = psi_verify(&Complex::with_val(p, (0.13, 1.1)), &ctx).unwrap();
        let b = psi_verify(&Complex::with_val(p, (1.13, 1.1)), &ctx).unwrap();
        assert!(a.0 < tol && a.1 < tol);
        assert!(b.0 < tol && b.1 < tol);
        let near = Complex::with_val(p, &point(2, -1, 1).tau + Complex::with_val(p, (1e-3, 0)));
        let c = psi_verify(&near, &ctx).unwrap();
        assert!(c.0 < tol && c.1 < tol);
    }

    #[test]
    fn root_selection_rings() {
        let ctx = ctx();
        let p = ctx.prec();
        let roots = vec![Complex::with_val(p, 1), Complex::with_val(p, -1)];
        assert_eq!(select_root(&roots, &Complex::with_val(p, -1), &ctx).unwrap(), 1);
        let off = Complex::with_val(p, -1) + ctx.ten_pow(-20);
        assert!(select_root(&roots, &off, &ctx).is_err());
        let close = vec![Complex::with_val(p, 1), Complex::with_val(p, 1) + ctx.ten_pow(-12)];
        assert!(select_root(&close, &Complex::with_val(p, 1), &ctx).is_err());
    }

    #[test]
    fn field_candidates() {
        assert_eq!(candidate_fields(7), vec![-7, 7]);
        assert!(candidate_fields(72).contains(&6));
        assert_eq!(candidate_fields(40)[0], -10);
        assert!(candidate_fields(40).contains(&5));
    }
}
