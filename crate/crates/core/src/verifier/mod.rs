//! End-to-end check of one formula instance: series LHS against the modular RHS, the b-formula,
//! and the table cells.

pub mod args;
pub mod cmdata;
pub mod tables;
pub mod track;

pub use args::{
    compute_arg, compute_arg_derivative, compute_f_pm, compute_f_prime, compute_h, compute_h_prime, compute_z_pm, compute_z_prime, Sign,
};
pub use cmdata::{BranchData, CMData};
pub use tables::{check_row, CellCheck, RowCheck};

use crate::error::{Error, Result};
use crate::hypergeom::{elliptic_e, elliptic_k};
use crate::numerics::{cabs, const_pi, fmt_real, PrecisionContext};
use crate::registry::{CaseSpec, CaseStatus};
use crate::series::series_sums;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

/// Digits given up relative to the working precision for a "verified" verdict (1e-40 at 60 digits).
pub const VERIFY_LOSS: u32 = 20;
/// Same for evidence-only cases (1e-30 at 40 digits).
pub const EVIDENCE_LOSS: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportStatus {
    Verified,
    EvidenceOnly,
    Failed,
}

/// The two half-terms of the key formula, before the factor 1/pi.
#[derive(Clone, Debug)]
pub struct RhsTerms {
    pub halves: [Complex; 2],
    /// (halves[0] + halves[1]) / pi
    pub value: Complex,
}

/// h t z_i' / (2 C_i z_i) * Z_j / Z_i for both i, then the sum over pi.
pub fn rhs_terms(cm: &CMData, ctx: &PrecisionContext) -> RhsTerms {
    let p = ctx.prec();
    let ht = Complex::with_val(p, &cm.h * Float::with_val(p, &cm.t));
    let half = |i: usize| {
        let (bi, bj) = (&cm.branches[i], &cm.branches[1 - i]);
        let num = Complex::with_val(p, &bi.arg_prime * &ht);
        let den = Complex::with_val(p, bi.c(ctx) * &bi.arg) * 2u32;
        Complex::with_val(p, num / den) * Complex::with_val(p, &bj.z / &bi.z)
    };
    let halves = [half(0), half(1)];
    let value = Complex::with_val(p, &halves[0] + &halves[1]) / const_pi(ctx);
    RhsTerms { halves, value }
}

pub fn rhs_key(cm: &CMData, ctx: &PrecisionContext) -> Complex {
    rhs_terms(cm, ctx).value
}

/// -(1/h) (sum_i B_i z_i' h t / (2 z_i) + h' t); `dB` perturbs the two B values.
pub fn b_formula(cm: &CMData, d_b: [&Complex; 2], ctx: &PrecisionContext) -> Complex {
    let p = ctx.prec();
    let t = Float::with_val(p, &cm.t);
    let ht = Float::with_val(p, &cm.h * &t);
    let mut acc = Complex::with_val(p, Float::with_val(p, &cm.h_prime * &t));
    for (i, br) in cm.branches.iter().enumerate() {
        let b = Complex::with_val(p, br.b(ctx) + d_b[i]);
        let term = Complex::with_val(p, b * &br.arg_prime) * &ht / Complex::with_val(p, &br.arg * 2u32);
        acc += term;
    }
    -acc / &cm.h
}

pub fn b_residual(case_b: &Rational, cm: &CMData, ctx: &PrecisionContext) -> Float {
    let zero = Complex::with_val(ctx.prec(), 0);
    let bf = b_formula(cm, [&zero, &zero], ctx);
    cabs(&Complex::with_val(ctx.prec(), bf - Float::with_val(ctx.prec(), case_b)))
}

/// Numbers attached to a report beyond the headline residuals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// |half+ - conj(half-)|, present when z+ = conj(z-)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjugate_asymmetry: Option<String>,
    /// |series generating function - h Z+ Z-| at the case point, continued branches
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_deviation: Option<String>,
    /// "agrees" when the principal 2F1 products equal the continued ones, else "sheet_changes"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub principal_route: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub tau: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub continued_tau: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub table_mismatches: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub lhs: String,
    pub rhs: String,
    pub abs_diff: String,
    pub b_residual: String,
    pub rhs_imag_leak: String,
    pub terms_used: usize,
    pub precision: u32,
    pub table_match: Option<bool>,
    pub status: ReportStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub diagnostics: Diagnostics,
}

impl VerificationReport {
    /// The status this case ought to reach: verified for P/W, evidence-only for open U/V cases.
    pub fn expected_status(case: &CaseSpec) -> ReportStatus {
        if case.family.evidence_only() || case.status == CaseStatus::Open {
            ReportStatus::EvidenceOnly
        } else {
            ReportStatus::Verified
        }
    }

    fn failed(case: &CaseSpec, ctx: &PrecisionContext, stage: &str, e: Error) -> Self {
        VerificationReport {
            id: case.id.clone(),
            lhs: String::new(),
            rhs: String::new(),
            abs_diff: String::new(),
            b_residual: String::new(),
            rhs_imag_leak: String::new(),
            terms_used: 0,
            precision: ctx.digits,
            table_match: None,
            status: ReportStatus::Failed,
            failed_stage: Some(stage.to_string()),
            error: Some(e.to_string()),
            diagnostics: Diagnostics::default(),
        }
    }
}

/// Full-precision numbers behind a report, for callers that want more than strings.
#[derive(Clone, Debug)]
pub struct CaseNumbers {
    pub lhs: Float,
    pub rhs: Float,
    pub abs_diff: Float,
    pub b_residual: Option<Float>,
    pub rhs_imag_leak: Option<Float>,
    pub key_rhs: Option<Complex>,
    pub conjugate_asymmetry: Option<Float>,
    pub decomposition_deviation: Option<Float>,
    pub terms_used: usize,
}

fn sci(x: &Float) -> String {
    fmt_real(x, 6)
}

fn full(x: &Float, ctx: &PrecisionContext) -> String {
    fmt_real(x, ctx.digits as usize)
}

struct Staged<'a> {
    case: &'a CaseSpec,
    ctx: &'a PrecisionContext,
}

impl Staged<'_> {
    fn run<T>(&self, stage: &str, r: Result<T>) -> std::result::Result<T, Box<VerificationReport>> {
        r.map_err(|e| Box::new(VerificationReport::failed(self.case, self.ctx, stage, e)))
    }
}

/// Runs the whole pipeline and returns both the report and the raw numbers.
pub fn verify_case_numbers(case: &CaseSpec, ctx: &PrecisionContext) -> std::result::Result<(VerificationReport, CaseNumbers), Box<VerificationReport>> {
    let p = ctx.prec();
    let st = Staged { case, ctx };
    let sums = st.run("series", series_sums(case.family, &case.t, &case.x, ctx))?;
    let lhs = sums.value(&case.b);
    let rhs = st.run("rhs_eval", case.rhs.eval(ctx))?;
    let abs_diff = Float::with_val(p, &lhs - &rhs).abs();

    let mut nums = CaseNumbers {
        lhs: lhs.clone(),
        rhs: rhs.clone(),
        abs_diff: abs_diff.clone(),
        b_residual: None,
        rhs_imag_leak: None,
        key_rhs: None,
        conjugate_asymmetry: None,
        decomposition_deviation: None,
        terms_used: sums.terms_used,
    };
    let mut report = VerificationReport {
        id: case.id.clone(),
        lhs: full(&lhs, ctx),
        rhs: full(&rhs, ctx),
        abs_diff: sci(&abs_diff),
        b_residual: String::new(),
        rhs_imag_leak: String::new(),
        terms_used: sums.terms_used,
        precision: ctx.digits,
        table_match: None,
        status: ReportStatus::Failed,
        failed_stage: None,
        error: None,
        diagnostics: Diagnostics::default(),
    };

    if case.family.evidence_only() {
        report.status = if abs_diff < ctx.tol(EVIDENCE_LOSS) { ReportStatus::EvidenceOnly } else { ReportStatus::Failed };
        if report.status == ReportStatus::Failed {
            report.failed_stage = Some("compare".into());
            report.error = Some(format!("|LHS - RHS| = {} exceeds {}", sci(&abs_diff), sci(&ctx.tol(EVIDENCE_LOSS))));
        }
        return Ok((report, nums));
    }

    let cm = st.run("cm_data", CMData::build(case.family, &case.t, &case.x, ctx))?;
    let terms = rhs_terms(&cm, ctx);
    let leak = Float::with_val(p, terms.value.imag().abs_ref());
    let key_diff = Float::with_val(p, terms.value.real() - &rhs).abs();
    let bres = b_residual(&case.b, &cm, ctx);

    // conjugate symmetry only applies to complex-conjugate argument pairs
    let [a0, a1] = [&cm.branches[0].arg, &cm.branches[1].arg];
    let conj_pair = Float::with_val(p, a0.real() - a1.real()).abs() + Float::with_val(p, a0.imag() + a1.imag()).abs();
    let conj_asym = if conj_pair < ctx.tol(VERIFY_LOSS) * Float::with_val(p, cabs(a0)).max(&Float::with_val(p, 1)) {
        let c1 = Complex::with_val(p, terms.halves[1].conj_ref());
        Some(cabs(&Complex::with_val(p, &terms.halves[0] - c1)))
    } else {
        None
    };

    let zz = Complex::with_val(p, &cm.branches[0].z * &cm.branches[1].z) * &cm.h;
    let decomp = cabs(&Complex::with_val(p, zz - &sums.gf));

    let row = case.expected_row.as_ref().map(|r| check_row(case, r, &cm, ctx));

    let agrees = cm.branches.iter().all(|b| b.principal_route_agrees(ctx));
    report.diagnostics = Diagnostics {
        conjugate_asymmetry: conj_asym.as_ref().map(sci),
        decomposition_deviation: Some(sci(&decomp)),
        principal_route: Some(if agrees { "agrees" } else { "sheet_changes" }.into()),
        tau: cm.branches.iter().map(|b| b.point.form.tau_string()).collect(),
        continued_tau: cm.branches.iter().map(|b| b.continued_form.tau_string()).collect(),
        table_mismatches: row.as_ref().map(|r| r.mismatches()).unwrap_or_default(),
    };
    report.b_residual = sci(&bres);
    report.rhs_imag_leak = sci(&leak);
    report.table_match = row.as_ref().map(|r| r.all_ok());

    let thr = ctx.tol(VERIFY_LOSS);
    let mut problems = Vec::new();
    if abs_diff >= thr {
        problems.push(format!("|LHS - RHS| = {}", sci(&abs_diff)));
    }
    if key_diff >= thr {
        problems.push(format!("|key RHS - RHS| = {}", sci(&key_diff)));
    }
    if bres >= thr {
        problems.push(format!("b residual = {}", sci(&bres)));
    }
    if leak >= thr {
        problems.push(format!("imaginary leak = {}", sci(&leak)));
    }
    if conj_asym.as_ref().is_some_and(|c| *c >= thr) {
        problems.push("half-terms are not conjugate".into());
    }
    if decomp >= thr {
        problems.push(format!("decomposition deviation = {}", sci(&decomp)));
    }
    if report.table_match == Some(false) {
        problems.push("table mismatch".into());
    }
    if problems.is_empty() {
        report.status = if case.status == CaseStatus::Open { ReportStatus::EvidenceOnly } else { ReportStatus::Verified };
    } else {
        report.status = ReportStatus::Failed;
        report.failed_stage = Some("compare".into());
        report.error = Some(problems.join("; ") + &format!(" (threshold {})", sci(&thr)));
    }

    nums.b_residual = Some(bres);
    nums.rhs_imag_leak = Some(leak);
    nums.key_rhs = Some(terms.value);
    nums.conjugate_asymmetry = conj_asym;
    nums.decomposition_deviation = Some(decomp);
    Ok((report, nums))
}

pub fn verify_case(case: &CaseSpec, ctx: &PrecisionContext) -> VerificationReport {
    match verify_case_numbers(case, ctx) {
        Ok((r, _)) => r,
        Err(r) => *r,
    }
}

#[derive(Clone, Debug)]
pub struct RemarkCheck {
    pub value: Complex,
    pub residual: Float,
    pub imag_leak: Float,
    pub k: [Complex; 2],
}

/// (25/(6 pi^2)) (E(a+)K(a-) + E(a-)K(a+) - 3/2 K(a+)K(a-)) against 75/(48 pi), a+- = (3 +- sqrt(-7))/8.
pub fn verify_remark(ctx: &PrecisionContext) -> Result<RemarkCheck> {
    let p = ctx.prec();
    let s7 = Float::with_val(p, 7).sqrt();
    let mut k = Vec::new();
    let mut e = Vec::new();
    for sgn in [1i32, -1] {
        let a = Complex::with_val(p, (Float::with_val(p, 3) / 8u32, Float::with_val(p, &s7 * sgn) / 8u32));
        // a is the modulus itself: 2F1(1/2,1/2;1;a^2) = (2/pi) K(a)
        k.push(elliptic_k(&a, ctx)?);
        e.push(elliptic_e(&a, ctx)?);
    }
    let pi = const_pi(ctx);
    let comb = Complex::with_val(p, &e[0] * &k[1]) + Complex::with_val(p, &e[1] * &k[0])
        - Complex::with_val(p, &k[0] * &k[1]) * Float::with_val(p, 1.5);
    let pref = Float::with_val(p, 25u32) / (Float::with_val(p, &pi * &pi) * 6u32);
    let value = comb * pref;
    let target = Float::with_val(p, 75u32) / (Float::with_val(p, &pi * 48u32));
    let residual = cabs(&Complex::with_val(p, &value - target));
    let imag_leak = Float::with_val(p, value.imag().abs_ref());
    Ok(RemarkCheck { value, residual, imag_leak, k: [k[0].clone(), k[1].clone()] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::CaseRegistry;

    fn ctx60() -> PrecisionContext {
        PrecisionContext::new(60).unwrap()
    }

    #[test]
    fn cp1_verified() {
        let reg = CaseRegistry::shipped();
        let (r, n) = verify_case_numbers(reg.get("cp1").unwrap(), &ctx60()).unwrap();
        assert_eq!(r.status, ReportStatus::Verified, "{r:?}");
        assert!(n.abs_diff < 1e-40);
        assert_eq!(r.table_match, Some(true));
        assert_eq!(r.diagnostics.principal_route.as_deref(), Some("agrees"));
    }

    #[test]
    fn p1_equal_halves() {
        let ctx = ctx60();
        let case = CaseRegistry::shipped().get("p1").unwrap().clone();
        let cm = CMData::build(case.family, &case.t, &case.x, &ctx).unwrap();
        let t = rhs_terms(&cm, &ctx);
        assert!(cabs(&Complex::with_val(ctx.prec(), &t.halves[0] - &t.halves[1])) < 1e-40);
        let want = Float::with_val(ctx.prec(), 3).sqrt() / (const_pi(&ctx) * 4u32);
        assert!(Float::with_val(ctx.prec(), t.value.real() - want).abs() < 1e-40);
    }

    #[test]
    fn b_sensitivity_is_linear() {
        let ctx = ctx60();
        let p = ctx.prec();
        let case = CaseRegistry::shipped().get("cp1").unwrap().clone();
        let cm = CMData::build(case.family, &case.t, &case.x, &ctx).unwrap();
        let zero = Complex::with_val(p, 0);
        let eps = Complex::with_val(p, ctx.ten_pow(-20));
        let base = b_formula(&cm, [&zero, &zero], &ctx);
        let moved = b_formula(&cm, [&eps, &zero], &ctx);
        let br = &cm.branches[0];
        // d b / d B+ = -arg' t / (2 arg)
        let slope = Complex::with_val(p, &br.arg_prime * Float::with_val(p, &cm.t)) / Complex::with_val(p, &br.arg * 2u32);
        let pred = Complex::with_val(p, &base - Complex::with_val(p, slope * &eps));
        assert!(cabs(&Complex::with_val(p, moved - pred)) < 1e-45);
        assert!(b_residual(&case.b, &cm, &ctx) < 1e-40);
    }

    #[test]
    fn u2_evidence_only() {
        let ctx = PrecisionContext::new(40).unwrap();
        let r = verify_case(CaseRegistry::shipped().get("u2").unwrap(), &ctx);
        assert_eq!(r.status, ReportStatus::EvidenceOnly, "{r:?}");
        assert_eq!(r.table_match, None);
    }

    #[test]
    fn remark() {
        let ctx = ctx60();
        let r = verify_remark(&ctx).unwrap();
        assert!(r.residual < 1e-40 && r.imag_leak < 1e-40, "{} {} {}", r.residual.to_f64(), r.imag_leak.to_f64(), r.value);
        for k in &r.k {
            assert!(k.real().is_finite() && !k.imag().is_zero());
        }
    }
}
