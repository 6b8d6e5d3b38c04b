//! Per-case modular data: the table CM points (principal values) and the continued sheet
//! reached by following each branch from t = 0.

use super::args::{compute_arg, compute_arg_derivative, compute_h, compute_h_prime, Sign};
use super::track::{curve_of, snap_tau, track_branch, TrackEnd, PATH_DELTA};
use crate::cm::{find_cm_point, CMPoint, QuadraticForm};
use crate::error::{Error, Result};
use crate::hypergeom::gauss_2f1;
use crate::modular::{hauptmodul, ModularData};
use crate::numerics::{cabs, cdist, principal_sqrt, to_c64, PrecisionContext};
use crate::series::SeriesFamily;
use rug::{Complex, Float, Rational};

/// Hypergeometric parameters (a, b) of Z for a family; c = 1.
pub fn z_params(family: SeriesFamily) -> (Rational, Rational) {
    match family {
        SeriesFamily::W => (Rational::from((1, 8)), Rational::from((3, 8))),
        _ => (Rational::from((1, 4)), Rational::from((1, 4))),
    }
}

/// One branch of the argument, evaluated at the case point.
#[derive(Clone, Debug)]
pub struct BranchData {
    pub sign: Sign,
    /// principal z or f at (t, x)
    pub arg: Complex,
    pub arg_prime: Complex,
    /// table point: first CM point with T(tau) = arg
    pub point: CMPoint,
    pub principal: ModularData,
    /// point reached by continuation, Gamma0(2)- or Fricke-equivalent to `point`
    pub continued_form: QuadraticForm,
    pub continued: ModularData,
    /// continued sqrt(1-T) = sigma * principal sqrt(1-T) at the continued point
    pub sigma: i32,
    /// continued Z = 2F1 along the path; Z^2 = sigma * Y(continued point)
    pub z: Complex,
    /// principal 2F1 at the principal argument
    pub z_principal: Complex,
    pub track_steps: usize,
}

impl BranchData {
    pub fn y(&self, ctx: &PrecisionContext) -> Complex {
        Complex::with_val(ctx.prec(), &self.continued.y * self.sigma)
    }

    pub fn c(&self, ctx: &PrecisionContext) -> Complex {
        Complex::with_val(ctx.prec(), self.continued.c(ctx) * self.sigma)
    }

    /// B is unchanged by the sign flip: f and sqrt(1-T) Y pick up the same sign twice.
    pub fn b(&self, ctx: &PrecisionContext) -> Complex {
        self.continued.b(ctx)
    }

    pub fn principal_route_agrees(&self, ctx: &PrecisionContext) -> bool {
        cdist(&self.z, &self.z_principal) < ctx.tol(20) * Float::with_val(ctx.prec(), cabs(&self.z)).max(&Float::with_val(ctx.prec(), 1))
    }
}

#[derive(Clone, Debug)]
pub struct CMData {
    pub family: SeriesFamily,
    pub t: Rational,
    pub x: Rational,
    pub h: Float,
    pub h_prime: Float,
    /// index 0 is the + branch of the argument formula
    pub branches: [BranchData; 2],
}

fn rel_tol(v: &Complex, loss: u32, ctx: &PrecisionContext) -> Float {
    let p = ctx.prec();
    ctx.tol(loss) * Float::with_val(p, cabs(v)).max(&Float::with_val(p, 1))
}

fn sign_against(tracked: num_complex::Complex64, principal: &Complex, what: &str) -> Result<i32> {
    let w = to_c64(principal);
    let (dp, dm) = ((tracked - w).norm(), (tracked + w).norm());
    if dp.min(dm) > 1e-6 * w.norm().max(1e-300) {
        return Err(Error::Continuation(format!("tracked {what} {tracked} is not +-{w}")));
    }
    Ok(if dp <= dm { 1 } else { -1 })
}

fn continued_branch(
    family: SeriesFamily,
    end: &TrackEnd,
    point: &CMPoint,
    arg: &Complex,
    ctx: &PrecisionContext,
) -> Result<(QuadraticForm, ModularData, i32, Complex)> {
    let curve = curve_of(family);
    let form = snap_tau(end.tau, point.d).ok_or_else(|| {
        Error::Continuation(format!("continued tau {} is not a CM point of discriminant -{}", end.tau, point.d))
    })?;
    let tau = form.root(ctx);
    let tv = hauptmodul(curve, &tau, ctx)?;
    if cdist(&tv, arg) > rel_tol(arg, 20, ctx) {
        return Err(Error::Continuation(format!("T at continued point {} misses the argument", form.tau_string())));
    }
    let md = ModularData::at(curve, &tau, ctx)?;
    let sigma = sign_against(end.sqrt_one_minus_t, &md.sqrt_one_minus_t, "sqrt(1-T)")?;
    let y = Complex::with_val(ctx.prec(), &md.y * sigma);
    let w = principal_sqrt(&y, ctx);
    let zs = sign_against(end.z, &w, "Z")?;
    Ok((form, md, sigma, Complex::with_val(ctx.prec(), w * zs)))
}

impl CMData {
    pub fn build(family: SeriesFamily, t: &Rational, x: &Rational, ctx: &PrecisionContext) -> Result<CMData> {
        if family.evidence_only() {
            return Err(Error::Domain(format!("family {family} has no CM data")));
        }
        if *t == 0 {
            return Err(Error::Degenerate("t = 0 has no CM point".into()));
        }
        let curve = curve_of(family);
        let h = compute_h(family, t, x, ctx)?;
        let h_prime = compute_h_prime(family, t, x, ctx)?;
        let (pa, pb) = z_params(family);
        let one = Rational::from(1);
        let signs = [Sign::Plus, Sign::Minus];
        let args: Vec<Complex> = signs.iter().map(|s| compute_arg(family, *s, t, x, ctx)).collect::<Result<_>>()?;

        let (tf, xf) = (t.to_f64(), x.to_f64());
        let mut out = Vec::with_capacity(2);
        for sign in signs {
            let end = track_branch(family, sign, tf, xf, PATH_DELTA)?;
            // pair the tracked endpoint with the principal argument it reached
            let k = if (end.arg - to_c64(&args[0])).norm() <= (end.arg - to_c64(&args[1])).norm() { 0 } else { 1 };
            if (end.arg - to_c64(&args[k])).norm() > 1e-8 * to_c64(&args[k]).norm().max(1e-300) {
                return Err(Error::Continuation(format!("tracked argument {} matches neither branch", end.arg)));
            }
            let arg = args[k].clone();
            let arg_prime = compute_arg_derivative(family, signs[k], t, x, ctx)?;
            let point = find_cm_point(curve, &arg, &rel_tol(&arg, 20, ctx), ctx)?;
            let principal = ModularData::at(curve, &point.tau, ctx)?;
            let (continued_form, continued, sigma, z) = continued_branch(family, &end, &point, &arg, ctx)?;
            let z_principal = gauss_2f1(&pa, &pb, &one, &arg, ctx)?;
            out.push(BranchData {
                sign: signs[k],
                arg,
                arg_prime,
                point,
                principal,
                continued_form,
                continued,
                sigma,
                z,
                z_principal,
                track_steps: end.steps,
            });
        }
        let b1 = out.pop().unwrap();
        let b0 = out.pop().unwrap();
        if b0.sign == b1.sign && cdist(&args[0], &args[1]) > rel_tol(&args[0], 20, ctx) {
            return Err(Error::Continuation("both branches continue to the same argument".into()));
        }
        Ok(CMData { family, t: t.clone(), x: x.clone(), h, h_prime, branches: [b0, b1] })
    }
}
