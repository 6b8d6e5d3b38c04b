use crate::algebra::surd::{is_squarefree, squarefree_part, ComplexSurd, QuadSurd, RealSurd};
use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;
use rug::{Complex, Float, Integer, Rational};

pub const DEFAULT_DENOM_BOUND: u64 = 1_000_000_000_000;

/// LLL reduction (delta = 3/4) of integer row vectors, exact rational Gram-Schmidt.
pub fn lll_reduce(rows: &mut [Vec<Integer>]) {
    let n = rows.len();
    if n < 2 {
        return;
    }
    let delta = Rational::from((3, 4));
    let gram_schmidt = |rows: &[Vec<Integer>]| -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let mut bstar: Vec<Vec<Rational>> = Vec::with_capacity(n);
        let mut mu = vec![vec![Rational::new(); n]; n];
        let mut norms = Vec::with_capacity(n);
        for i in 0..n {
            let mut v: Vec<Rational> = rows[i].iter().map(Rational::from).collect();
            for j in 0..i {
                let num: Rational = rows[i].iter().zip(&bstar[j]).map(|(x, y)| Rational::from(y * x)).sum();
                let m = if norms[j] == 0 { Rational::new() } else { num / &norms[j] };
                for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                    *vk -= Rational::from(&m * bk);
                }
                mu[i][j] = m;
            }
            let nv: Rational = v.iter().map(|x| Rational::from(x.square_ref())).sum();
            norms.push(nv);
            bstar.push(v);
        }
        (mu, norms)
    };

    let (mut mu, mut norms) = gram_schmidt(rows);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        for j in (0..k).rev() {
            let r = mu[k][j].clone().round();
            if r != 0 {
                let ri = r.numer().clone();
                let rj = rows[j].clone();
                for (x, y) in rows[k].iter_mut().zip(&rj) {
                    *x -= Integer::from(&ri * y);
                }
                let (m2, n2) = gram_schmidt(rows);
                mu = m2;
                norms = n2;
            }
        }
        let lhs = (&delta - Rational::from(mu[k][k - 1].square_ref())) * &norms[k - 1];
        if norms[k] >= lhs {
            k += 1;
        } else {
            rows.swap(k, k - 1);
            let (m2, n2) = gram_schmidt(rows);
            mu = m2;
            norms = n2;
            k = k.max(2) - 1;
        }
    }
}

/// Integer relations among xs found by LLL on rows scaled by 10^scale_digits, ordered by reduced-basis position.
pub fn integer_relations(xs: &[Float], scale_digits: u32, ctx: &PrecisionContext) -> Vec<Vec<Integer>> {
    let n = xs.len();
    let scale = ctx.ten_pow(scale_digits as i32);
    let mut rows: Vec<Vec<Integer>> = (0..n)
        .map(|i| {
            let mut r = vec![Integer::new(); n + 1];
            r[i] = Integer::from(1);
            let s = Float::with_val(ctx.prec(), &xs[i] * &scale).round();
            r[n] = s.to_integer().unwrap_or_default();
            r
        })
        .collect();
    lll_reduce(&mut rows);
    rows.into_iter().map(|mut r| {
        r.truncate(n);
        r
    }).collect()
}

fn check_precision(v: &Float, ctx: &PrecisionContext) -> Result<()> {
    if ctx.digits < 50 {
        return Err(Error::PrecisionUnreachable(format!("recognition needs >= 50 digits, context has {}", ctx.digits)));
    }
    if !v.is_finite() {
        return Err(Error::NotRecognized("non-finite value".into()));
    }
    Ok(())
}

/// Recognize a real value as sum of rational multiples of sqrt(d) over the given square-free radicands.
pub fn recognize_surd(v: &Float, radicands: &[u64], denom_bound: u64, ctx: &PrecisionContext) -> Result<RealSurd> {
    check_precision(v, ctx)?;
    let accept = ctx.tol(10);
    let p = ctx.prec();
    let mag = Float::with_val(p, v.abs_ref()).max(&Float::with_val(p, 1));
    if Float::with_val(p, v.abs_ref()) < accept {
        return Ok(RealSurd::zero());
    }
    let mut basis: Vec<u64> = vec![1];
    for d in radicands {
        let k = squarefree_part(*d);
        if !basis.contains(&k) {
            basis.push(k);
        }
    }
    let mut xs = vec![v.clone()];
    for d in &basis {
        xs.push(if *d == 1 { Float::with_val(p, 1) } else { Float::with_val(p, *d).sqrt() });
    }
    let scale = ctx.digits.saturating_sub(10);
    for rel in integer_relations(&xs, scale, ctx) {
        if rel[0] == 0 {
            continue;
        }
        let mut s = RealSurd::zero();
        for (i, d) in basis.iter().enumerate() {
            let q = Rational::from((-rel[i + 1].clone(), rel[0].clone()));
            s = s.add(&RealSurd::term(q, *d));
        }
        if s.max_denominator() > denom_bound {
            continue;
        }
        let resid = Float::with_val(p, v - s.eval(ctx)).abs();
        if resid < Float::with_val(p, &accept * &mag) {
            return Ok(s);
        }
    }
    Err(Error::NotRecognized(format!(
        "{} is not in the span of sqrt{:?} with denominators <= {denom_bound}",
        crate::numerics::fmt_real(v, 20),
        basis
    )))
}

/// Rationals a, b with v = a + b*sqrt(d).
pub fn recognize_in_field(v: &Float, d: i64, denom_bound: u64, ctx: &PrecisionContext) -> Result<QuadSurd> {
    if d == 0 || !is_squarefree(d) {
        return Err(Error::Domain(format!("d = {d} must be square-free and nonzero")));
    }
    let radicands: Vec<u64> = if d > 1 { vec![d as u64] } else { vec![] };
    let s = recognize_surd(v, &radicands, denom_bound, ctx)?;
    let a = s.coefficient(1);
    let b = if d > 1 { s.coefficient(d as u64) } else { Rational::new() };
    QuadSurd::new(a, b, if d > 1 { d } else { 1 })
}

/// Real part over Q(sqrt(d_re)), imaginary part over Q(sqrt(d_im)).
pub fn recognize_complex(v: &Complex, d_re: i64, d_im: i64, denom_bound: u64, ctx: &PrecisionContext) -> Result<(QuadSurd, QuadSurd)> {
    let re = recognize_in_field(v.real(), d_re, denom_bound, ctx)
        .map_err(|e| Error::NotRecognized(format!("real part: {e}")))?;
    let im = recognize_in_field(v.imag(), d_im, denom_bound, ctx)
        .map_err(|e| Error::NotRecognized(format!("imaginary part: {e}")))?;
    Ok((re, im))
}

/// Complex value with separate radicand bases for the real and imaginary parts.
pub fn recognize_complex_surd(v: &Complex, re_basis: &[u64], im_basis: &[u64], denom_bound: u64, ctx: &PrecisionContext) -> Result<ComplexSurd> {
    let re = recognize_surd(v.real(), re_basis, denom_bound, ctx)
        .map_err(|e| Error::NotRecognized(format!("real part: {e}")))?;
    let im = recognize_surd(v.imag(), im_basis, denom_bound, ctx)
        .map_err(|e| Error::NotRecognized(format!("imaginary part: {e}")))?;
    Ok(ComplexSurd::new(re, im))
}
