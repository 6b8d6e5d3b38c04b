use pyo3::prelude::*;

#[pymodule]
pub mod rpi {
    use pyo3::exceptions::{PyKeyError, PyValueError};
    use pyo3::prelude::*;
    use rpi_core::algebra::{recognize_complex, DEFAULT_DENOM_BOUND};
    use rpi_core::hypergeom;
    use rpi_core::modular::{self, CurveTag};
    use rpi_core::numerics::{fmt_real, PrecisionContext};
    use rpi_core::registry::{rational_str, CaseRegistry};
    use rpi_core::series::{self, SeriesFamily};
    use rpi_core::verifier::{self, tables};
    use rug::{Complex, Float, Rational};

    fn err(e: rpi_core::Error) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    fn context(digits: u32) -> PyResult<PrecisionContext> {
        PrecisionContext::new(digits).map_err(err)
    }

    fn rational(s: &str) -> PyResult<Rational> {
        rational_str::parse(s).map_err(PyValueError::new_err)
    }

    fn decimal(s: &str, ctx: &PrecisionContext) -> PyResult<Float> {
        let v = Float::parse(s.trim()).map_err(|e| PyValueError::new_err(format!("bad decimal {s:?}: {e}")))?;
        Ok(Float::with_val(ctx.prec(), v))
    }

    fn parts(z: &Complex, ctx: &PrecisionContext) -> (String, String) {
        let n = ctx.digits as usize;
        (fmt_real(z.real(), n), fmt_real(z.imag(), n))
    }

    fn json<'py>(py: Python<'py>, s: String) -> PyResult<Bound<'py, PyAny>> {
        py.import("json")?.call_method1("loads", (s,))
    }

    /// Ids of every registered case, in registry order.
    #[pyfunction]
    fn case_ids() -> Vec<String> {
        CaseRegistry::shipped().ids().into_iter().map(String::from).collect()
    }

    /// The shipped registry as a list of dicts.
    #[pyfunction]
    fn registry(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
        json(py, CaseRegistry::shipped().to_json())
    }

    /// Run the verification pipeline for one case; returns the report as a dict.
    #[pyfunction]
    #[pyo3(signature = (case_id, digits = 60))]
    fn verify<'py>(py: Python<'py>, case_id: &str, digits: u32) -> PyResult<Bound<'py, PyAny>> {
        let ctx = context(digits)?;
        let reg = CaseRegistry::shipped();
        let case = reg.get(case_id).map_err(|e| PyKeyError::new_err(e.to_string()))?;
        let report = py.detach(|| verifier::verify_case(case, &ctx));
        json(py, serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?)
    }

    /// Recompute one table; returns [(id, ok, mismatches)].
    #[pyfunction]
    #[pyo3(signature = (table, digits = 60))]
    fn check_table(py: Python<'_>, table: u8, digits: u32) -> PyResult<Vec<(String, bool, Vec<String>)>> {
        let ctx = context(digits)?;
        let reg = CaseRegistry::shipped();
        py.detach(|| {
            reg.table(table)
                .into_iter()
                .map(|case| {
                    let row = tables::recompute_row(case, &ctx).map_err(err)?;
                    Ok((case.id.clone(), row.all_ok(), row.mismatches()))
                })
                .collect()
        })
    }

    /// Value of the series for family "P", "W", "U" or "V" at rational t, x, b.
    #[pyfunction]
    #[pyo3(signature = (family, t, x, b, digits = 60))]
    fn series_value(family: &str, t: &str, x: &str, b: &str, digits: u32) -> PyResult<String> {
        let ctx = context(digits)?;
        let fam: SeriesFamily = family.parse().map_err(err)?;
        let v = series::series_value(fam, &rational(t)?, &rational(x)?, &rational(b)?, &ctx).map_err(err)?;
        Ok(fmt_real(&v, digits as usize))
    }

    /// 2F1(a, b; c; z) with rational parameters; z and the result as (re, im) decimal strings.
    #[pyfunction]
    #[pyo3(signature = (a, b, c, re, im = "0", digits = 60))]
    fn gauss_2f1(a: &str, b: &str, c: &str, re: &str, im: &str, digits: u32) -> PyResult<(String, String)> {
        let ctx = context(digits)?;
        let z = Complex::with_val(ctx.prec(), (decimal(re, &ctx)?, decimal(im, &ctx)?));
        let v = hypergeom::gauss_2f1(&rational(a)?, &rational(b)?, &rational(c)?, &z, &ctx).map_err(err)?;
        Ok(parts(&v, &ctx))
    }

    /// Hauptmodul T(tau) of X0(2) (curve="X0(2)") or X0(2)+ (curve="X0(2)+").
    #[pyfunction]
    #[pyo3(signature = (re, im, curve = "X0(2)", digits = 60))]
    fn hauptmodul(re: &str, im: &str, curve: &str, digits: u32) -> PyResult<(String, String)> {
        let ctx = context(digits)?;
        let tag = match curve {
            "X0(2)" => CurveTag::X0_2,
            "X0(2)+" => CurveTag::X0_2Plus,
            _ => return Err(PyValueError::new_err(format!("unknown curve {curve:?}"))),
        };
        let tau = Complex::with_val(ctx.prec(), (decimal(re, &ctx)?, decimal(im, &ctx)?));
        let v = modular::hauptmodul(tag, &tau, &ctx).map_err(err)?;
        Ok(parts(&v, &ctx))
    }

    /// Recognize re + i im with re in Q(sqrt(d1)) and im in Q(sqrt(d2)); None when no relation is found.
    #[pyfunction]
    #[pyo3(signature = (re, im, d1 = 1, d2 = 1, digits = 60))]
    fn recognize(re: &str, im: &str, d1: i64, d2: i64, digits: u32) -> PyResult<Option<(String, String)>> {
        let ctx = context(digits)?.with_guard(0);
        let v = Complex::with_val(ctx.prec(), (decimal(re, &ctx)?, decimal(im, &ctx)?));
        match recognize_complex(&v, d1, d2, DEFAULT_DENOM_BOUND, &ctx) {
            Ok((a, b)) => Ok(Some((a.to_string(), b.to_string()))),
            Err(rpi_core::Error::NotRecognized(_)) => Ok(None),
            Err(e) => Err(err(e)),
        }
    }

    /// Residual of the elliptic-integral form of the cp1 constant.
    #[pyfunction]
    #[pyo3(signature = (digits = 60))]
    fn remark_residual(digits: u32) -> PyResult<String> {
        let ctx = context(digits)?;
        let r = verifier::verify_remark(&ctx).map_err(err)?;
        Ok(fmt_real(&r.residual, 6))
    }
}
