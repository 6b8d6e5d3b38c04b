//! Recompute a table row from CM data and recognize every cell as an exact surd.
//!
//! B, C and the Y-ratio are principal values at the printed (upper) tau points. Columns are
//! paired with branches through tau, not through the +- labels. For W the printed argument
//! column is sqrt(f) for the opposite label, so the check squares the cell.

use super::cmdata::CMData;
use crate::algebra::{recognize_complex_surd, ComplexSurd, Expr, DEFAULT_DENOM_BOUND};
use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;
use crate::registry::{CaseSpec, TableRow};
use crate::series::SeriesFamily;
use rug::Complex;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCheck {
    pub column: String,
    pub expected: String,
    /// recognized exact value, or the recognition error
    pub computed: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCheck {
    pub id: String,
    pub table: u8,
    pub cells: Vec<CellCheck>,
}

impl RowCheck {
    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(|c| c.ok)
    }

    pub fn mismatches(&self) -> Vec<String> {
        self.cells.iter().filter(|c| !c.ok).map(|c| format!("{}: expected {}, got {}", c.column, c.expected, c.computed)).collect()
    }
}

pub fn parse_cell(s: &str) -> Result<ComplexSurd> {
    Expr::parse(s)?.to_surd().ok_or_else(|| Error::Parse(format!("table cell {s:?} is not a quadratic surd")))
}

fn basis(s: &crate::algebra::RealSurd) -> Vec<u64> {
    s.radicands().into_iter().filter(|d| *d != 1).collect()
}

/// Recognize v over the radicands appearing in `expected`.
pub fn recognize_like(v: &Complex, expected: &ComplexSurd, ctx: &PrecisionContext) -> Result<ComplexSurd> {
    recognize_complex_surd(v, &basis(&expected.re), &basis(&expected.im), DEFAULT_DENOM_BOUND, ctx)
}

fn cell(column: String, expected_src: &str, expected: Result<ComplexSurd>, value: &Complex, ctx: &PrecisionContext) -> CellCheck {
    let (computed, ok) = match expected {
        Err(e) => (format!("bad cell: {e}"), false),
        Ok(exp) => match recognize_like(value, &exp, ctx) {
            Ok(r) => {
                let ok = r == exp;
                (r.to_string(), ok)
            }
            Err(e) => (e.to_string(), false),
        },
    };
    CellCheck { column, expected: expected_src.to_string(), computed, ok }
}

const LABELS: [&str; 2] = ["+", "-"];

pub fn check_row(case: &CaseSpec, row: &TableRow, cm: &CMData, ctx: &PrecisionContext) -> RowCheck {
    let p = ctx.prec();
    let mut cells = Vec::new();
    let h = Complex::with_val(p, &cm.h);
    cells.push(cell("h".into(), &row.h, parse_cell(&row.h), &h, ctx));

    // column j of the table belongs to the branch whose CM point equals tau_j up to translation
    let mut used = [false; 2];
    let mut assign = [None, None];
    for (j, src) in row.tau.iter().enumerate() {
        let Ok(exp) = parse_cell(src) else { continue };
        let hit = (0..2)
            .filter(|i| cm.branches[*i].point.form.root_surd().eq_mod_integer_re(&exp))
            .min_by_key(|i| used[*i]);
        if let Some(i) = hit {
            used[i] = true;
            assign[j] = Some(i);
        }
    }

    for j in 0..2 {
        let lab = LABELS[j];
        let Some(i) = assign[j] else {
            for (name, src) in [("tau", &row.tau[j]), ("arg", &row.arg[j]), ("B", &row.b[j]), ("C", &row.c[j]), ("Y-ratio", &row.yratio[j])] {
                cells.push(CellCheck {
                    column: format!("{name}{lab}"),
                    expected: src.clone(),
                    computed: "no branch lands on this tau".into(),
                    ok: false,
                });
            }
            continue;
        };
        let br = &cm.branches[i];
        let other = &cm.branches[1 - i];
        cells.push(CellCheck {
            column: format!("tau{lab}"),
            expected: row.tau[j].clone(),
            computed: br.point.form.tau_string(),
            ok: true,
        });
        match case.family {
            SeriesFamily::W => {
                let src = &row.arg[1 - j];
                let exp = parse_cell(src).map(|s| s.mul(&s));
                cells.push(cell(format!("arg{lab}"), &format!("({src})^2"), exp, &br.arg, ctx));
            }
            _ => cells.push(cell(format!("arg{lab}"), &row.arg[j], parse_cell(&row.arg[j]), &br.arg, ctx)),
        }
        cells.push(cell(format!("B{lab}"), &row.b[j], parse_cell(&row.b[j]), &br.principal.b(ctx), ctx));
        cells.push(cell(format!("C{lab}"), &row.c[j], parse_cell(&row.c[j]), &br.principal.c(ctx), ctx));
        let yr = Complex::with_val(p, &br.principal.y / &other.principal.y);
        cells.push(cell(format!("Y-ratio{lab}"), &row.yratio[j], parse_cell(&row.yratio[j]), &yr, ctx));
    }
    RowCheck { id: case.id.clone(), table: row.table, cells }
}

/// Build CM data for a table case and check its row.
pub fn recompute_row(case: &CaseSpec, ctx: &PrecisionContext) -> Result<RowCheck> {
    let row = case.expected_row.as_ref().ok_or_else(|| Error::Domain(format!("case {} has no table row", case.id)))?;
    let cm = CMData::build(case.family, &case.t, &case.x, ctx)?;
    Ok(check_row(case, row, &cm, ctx))
}
