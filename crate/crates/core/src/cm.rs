//! Binary quadratic forms of level 2 and the search for CM points with prescribed hauptmodul value.

use crate::algebra::surd::{squarefree_split, ComplexSurd, RealSurd};
use crate::error::{Error, Result};
use crate::modular::{fast, hauptmodul, CurveTag};
use crate::numerics::{cdist, to_c64, PrecisionContext};
use num_complex::Complex64;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Discriminants -D with H(D) = 1 and H(D) = 2.
pub const H1: [u32; 13] = [3, 4, 7, 8, 11, 12, 16, 19, 27, 28, 43, 67, 163];
pub const H2: [u32; 29] = [
    15, 20, 24, 32, 35, 36, 40, 48, 51, 52, 60, 64, 72, 75, 88, 91, 99, 100, 112, 115, 123, 147, 148, 187, 232, 235, 267, 403, 427,
];

/// Upper limit for the fallback scan beyond the class-number lists.
pub const FALLBACK_D_MAX: u32 = 2000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassNumberList {
    pub h1: Vec<u32>,
    pub h2: Vec<u32>,
}

impl ClassNumberList {
    pub fn contains(&self, d: u32) -> bool {
        self.h1.contains(&d) || self.h2.contains(&d)
    }

    /// Both lists merged in ascending order.
    pub fn ascending(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.h1.iter().chain(&self.h2).copied().collect();
        v.sort_unstable();
        v
    }
}

pub fn class_number_list() -> ClassNumberList {
    ClassNumberList { h1: H1.to_vec(), h2: H2.to_vec() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub level: i64,
}

impl QuadraticForm {
    pub fn new(a: i64, b: i64, c: i64, level: i64) -> Result<QuadraticForm> {
        if a <= 0 || b * b - 4 * a * c >= 0 {
            return Err(Error::Domain(format!("[{a},{b},{c}] is not positive definite")));
        }
        if level <= 0 || a % level != 0 {
            return Err(Error::Domain(format!("level {level} does not divide a = {a}")));
        }
        Ok(QuadraticForm { a, b, c, level })
    }

    /// -disc
    pub fn d(&self) -> u32 {
        (4 * self.a * self.c - self.b * self.b) as u32
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// (-b + i sqrt(D)) / (2a).
    pub fn root(&self, ctx: &PrecisionContext) -> Complex {
        let p = ctx.prec();
        let two_a = 2 * self.a;
        let re = Float::with_val(p, -self.b) / two_a;
        let im = Float::with_val(p, self.d()).sqrt() / two_a;
        Complex::with_val(p, (re, im))
    }

    pub fn root_f64(&self) -> Complex64 {
        let two_a = 2.0 * self.a as f64;
        Complex64::new(-self.b as f64 / two_a, (self.d() as f64).sqrt() / two_a)
    }

    pub fn root_surd(&self) -> ComplexSurd {
        let two_a = 2 * self.a;
        let re = RealSurd::rational(Rational::from((-self.b, two_a)));
        let im = RealSurd::sqrt_rational(&Rational::from((self.d() as i64, two_a * two_a))).unwrap();
        ComplexSurd::new(re, im)
    }

    /// Image under tau -> -1/(2 tau): [2c, -b, a/2].
    pub fn fricke(&self) -> Result<QuadraticForm> {
        if self.a % 2 != 0 {
            return Err(Error::Domain("Fricke image needs 2 | a".into()));
        }
        QuadraticForm::new(2 * self.c, -self.b, self.a / 2, self.level)
    }

    /// Image under tau -> tau + n.
    pub fn translate(&self, n: i64) -> QuadraticForm {
        // a(tau - n)^2 + b(tau - n) + c
        QuadraticForm { a: self.a, b: self.b - 2 * self.a * n, c: self.a * n * n - self.b * n + self.c, level: self.level }
    }

    /// Root as a readable surd, e.g. (1+sqrt(-7))/4.
    pub fn tau_string(&self) -> String {
        let (s, k) = squarefree_split(&Integer::from(self.d()));
        let s = s.to_i64().unwrap();
        let k = k.to_i64().unwrap();
        let mut nb = -self.b;
        let mut den = 2 * self.a;
        let mut s = s;
        let g = gcd(gcd(nb.abs(), s), den);
        nb /= g;
        s /= g;
        den /= g;
        let rad = if s == 1 { format!("sqrt(-{k})") } else { format!("{s}*sqrt(-{k})") };
        let num = if nb == 0 { rad } else { format!("({nb}+{rad})") };
        if den == 1 {
            num
        } else {
            format!("{num}/{den}")
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CMPoint {
    pub form: QuadraticForm,
    pub tau: Complex,
    pub d: u32,
}

impl CMPoint {
    pub fn from_form(form: QuadraticForm, ctx: &PrecisionContext) -> CMPoint {
        CMPoint { tau: form.root(ctx), d: form.d(), form }
    }

    pub fn fricke(&self, ctx: &PrecisionContext) -> Result<CMPoint> {
        Ok(CMPoint::from_form(self.form.fricke()?, ctx))
    }
}

pub fn is_discriminant(d: u32) -> bool {
    d > 0 && (d.is_multiple_of(4) || d % 4 == 3)
}

/// All [a,b,c] with N | a, 0 < a <= a_max, |b| <= a, b^2 - 4ac = -D; ordered by a then b.
pub fn enumerate_forms(d: u32, level: i64, a_max: i64) -> Result<Vec<QuadraticForm>> {
    if !is_discriminant(d) {
        return Err(Error::Domain(format!("-{d} is not a discriminant")));
    }
    if level <= 0 || a_max < level {
        return Err(Error::Domain(format!("a_max = {a_max} must be at least the level {level}")));
    }
    let dd = d as i64;
    let mut out = Vec::new();
    let mut a = level;
    while a <= a_max {
        for b in -a..=a {
            let num = b * b + dd;
            if num % (4 * a) == 0 {
                out.push(QuadraticForm { a, b, c: num / (4 * a), level });
            }
        }
        a += level;
    }
    Ok(out)
}

pub fn a_max_for(d: u32) -> i64 {
    4 * (d as f64).sqrt().ceil() as i64
}

/// Discriminants in scan order: the class-number lists ascending, then every other D up to the fallback limit.
pub fn scan_order() -> Vec<u32> {
    let list = class_number_list();
    let mut v = list.ascending();
    v.extend((3..=FALLBACK_D_MAX).filter(|d| is_discriminant(*d) && !list.contains(*d)));
    v
}

/// First CM point (D, then a, then b) whose hauptmodul value is within tol of target.
pub fn find_cm_point(curve: CurveTag, target: &Complex, tol: &Float, ctx: &PrecisionContext) -> Result<CMPoint> {
    let tgt = to_c64(target);
    if !tgt.re.is_finite() || !tgt.im.is_finite() {
        return Err(Error::Domain("target is not finite".into()));
    }
    let screen = 1e-7 * tgt.norm().max(1.0);
    for d in scan_order() {
        for form in enumerate_forms(d, 2, a_max_for(d))? {
            let Some(tv) = fast::hauptmodul(curve, form.root_f64()) else { continue };
            if (tv - tgt).norm() > screen {
                continue;
            }
            let tau = form.root(ctx);
            let full = hauptmodul(curve, &tau, ctx)?;
            if cdist(&full, target) < *tol {
                return Ok(CMPoint { form, tau, d });
            }
        }
    }
    Err(Error::NoCmPoint(format!(
        "no CM point with D <= {FALLBACK_D_MAX} matches T = {}",
        crate::numerics::fmt_complex(target, 20)
    )))
}
