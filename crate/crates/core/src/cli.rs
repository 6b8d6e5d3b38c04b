//! `rpi` command line: verify, tables, find-cm, recognize.

use crate::algebra::{recognize_complex, recognize_complex_surd, ComplexSurd, DEFAULT_DENOM_BOUND};
use crate::algebra::surd::squarefree_part;
use crate::cm::CMPoint;
use crate::error::{Error, Result};
use crate::numerics::{fmt_complex, PrecisionContext};
use crate::registry::{rational_str, CaseRegistry, CaseSpec};
use crate::series::SeriesFamily;
use crate::verifier::tables::recompute_row;
use crate::verifier::{verify_case, CMData, RowCheck, VerificationReport};
use clap::{Parser, Subcommand, ValueEnum};
use rug::{Complex, Float};
use serde::Serialize;
use std::io::Write;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Minimum significant digits accepted by `recognize`.
pub const RECOGNIZE_MIN_DIGITS: usize = 50;

#[derive(Parser, Debug)]
#[command(name = "rpi", version, about = "Verify Ramanujan-type 1/pi series through CM evaluations")]
pub struct Cli {
    /// Working precision in decimal digits
    #[arg(long, global = true, env = "RPI_DIGITS", default_value_t = 60)]
    pub digits: u32,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify registered cases
    Verify {
        ids: Vec<String>,
        #[arg(long)]
        all: bool,
    },
    /// Recompute and recognize table rows
    Tables {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        table: u8,
        /// Compare against the embedded table values
        #[arg(long)]
        check: bool,
    },
    /// Locate the CM points of a (t, x) pair
    FindCm {
        #[arg(long, value_enum, ignore_case = true)]
        family: FamilyArg,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Recognize a decimal complex number as a pair of quadratic surds
    Recognize {
        #[arg(long, allow_hyphen_values = true)]
        re: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        im: String,
        #[arg(long, default_value_t = 1)]
        d1: i64,
        #[arg(long, default_value_t = 1)]
        d2: i64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    P,
    W,
}

/// A report as emitted: the report fields plus run metadata.
#[derive(Serialize)]
pub struct EmittedReport<'a> {
    #[serde(flatten)]
    pub report: &'a VerificationReport,
    pub guard_digits: u32,
    pub timestamp: String,
}

/// ISO-8601 UTC time; SOURCE_DATE_EPOCH pins it for reproducible output.
pub fn timestamp() -> String {
    let dt = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    dt.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

struct Output {
    text: String,
    code: i32,
}

fn emit(cli: &Cli, out: Output) -> i32 {
    let res = match &cli.out {
        Some(path) => std::fs::write(path, &out.text),
        None => std::io::stdout().write_all(out.text.as_bytes()),
    };
    if let Err(e) = res {
        eprintln!("rpi: cannot write output: {e}");
        return EXIT_FAIL;
    }
    out.code
}

pub fn run(cli: Cli) -> i32 {
    let ctx = match PrecisionContext::new(cli.digits) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("rpi: {e}");
            return EXIT_USAGE;
        }
    };
    let res = match &cli.cmd {
        Command::Verify { ids, all } => cmd_verify(ids, *all, &ctx),
        Command::Tables { table, check } => cmd_tables(*table, *check, cli.format, &ctx),
        Command::FindCm { family, t, x } => cmd_find_cm(*family, t, x, &ctx),
        Command::Recognize { re, im, d1, d2 } => cmd_recognize(re, im, *d1, *d2),
    };
    match res {
        Ok(out) => emit(&cli, out),
        Err((code, msg)) => {
            eprintln!("rpi: {msg}");
            code
        }
    }
}

type CmdResult = std::result::Result<Output, (i32, String)>;

fn cmd_verify(ids: &[String], all: bool, ctx: &PrecisionContext) -> CmdResult {
    let reg = CaseRegistry::shipped();
    let cases: Vec<&CaseSpec> = if all {
        reg.cases.iter().collect()
    } else {
        if ids.is_empty() {
            return Err((EXIT_USAGE, "give case ids or --all".into()));
        }
        ids.iter().map(|id| reg.get(id).map_err(|e| (EXIT_USAGE, e.to_string()))).collect::<std::result::Result<_, _>>()?
    };
    let ts = timestamp();
    let mut text = String::new();
    let mut code = EXIT_OK;
    for case in cases {
        let r = verify_case(case, ctx);
        if r.status != VerificationReport::expected_status(case) {
            code = EXIT_FAIL;
        }
        let line = serde_json::to_string(&EmittedReport { report: &r, guard_digits: ctx.guard, timestamp: ts.clone() })
            .map_err(|e| (EXIT_FAIL, e.to_string()))?;
        text.push_str(&line);
        text.push('\n');
    }
    Ok(Output { text, code })
}

fn row_csv(rows: &[RowCheck]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "table".to_string()];
    if let Some(r) = rows.first() {
        header.extend(r.cells.iter().map(|c| c.column.clone()));
    }
    w.write_record(&header).map_err(|e| Error::Internal(e.to_string()))?;
    for r in rows {
        let mut rec = vec![r.id.clone(), r.table.to_string()];
        rec.extend(r.cells.iter().map(|c| c.computed.clone()));
        w.write_record(&rec).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

fn cmd_tables(table: u8, check: bool, format: Format, ctx: &PrecisionContext) -> CmdResult {
    let reg = CaseRegistry::shipped();
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for case in reg.table(table) {
        match recompute_row(case, ctx) {
            Ok(r) => rows.push(r),
            Err(e) => return Err((EXIT_FAIL, format!("row {}: {e}", case.id))),
        }
    }
    if check {
        for r in &rows {
            for m in r.mismatches() {
                eprintln!("mismatch in table {table}, row {}, column {m}", r.id);
                code = EXIT_FAIL;
            }
        }
    }
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&rows).map_err(|e| (EXIT_FAIL, e.to_string()))? + "\n",
        Format::Csv => row_csv(&rows).map_err(|e| (EXIT_FAIL, e.to_string()))?,
    };
    Ok(Output { text, code })
}

#[derive(Serialize)]
struct FoundBranch {
    sign: String,
    arg: String,
    arg_exact: Option<String>,
    form: String,
    d: u32,
    tau: String,
}

#[derive(Serialize)]
struct FoundCm {
    family: String,
    t: String,
    x: String,
    branches: Vec<FoundBranch>,
}

fn squarefree_divisors(d: u32) -> Vec<u64> {
    let s = squarefree_part(d as u64);
    (1..=s).filter(|k| s.is_multiple_of(*k)).collect()
}

/// Try small quadratic fields tied to the discriminant; None when nothing fits.
pub fn recognize_arg(v: &Complex, point: &CMPoint, ctx: &PrecisionContext) -> Option<ComplexSurd> {
    let divs = squarefree_divisors(point.d);
    for re in &divs {
        for im in &divs {
            let rb: Vec<u64> = if *re == 1 { vec![] } else { vec![*re] };
            let ib: Vec<u64> = if *im == 1 { vec![] } else { vec![*im] };
            if let Ok(s) = recognize_complex_surd(v, &rb, &ib, DEFAULT_DENOM_BOUND, ctx) {
                return Some(s);
            }
        }
    }
    None
}

fn cmd_find_cm(family: FamilyArg, t: &str, x: &str, ctx: &PrecisionContext) -> CmdResult {
    let t = rational_str::parse(t).map_err(|e| (EXIT_USAGE, e))?;
    let x = rational_str::parse(x).map_err(|e| (EXIT_USAGE, e))?;
    let fam = match family {
        FamilyArg::P => SeriesFamily::P,
        FamilyArg::W => SeriesFamily::W,
    };
    let cm = CMData::build(fam, &t, &x, ctx).map_err(|e| (EXIT_FAIL, e.to_string()))?;
    let branches = cm
        .branches
        .iter()
        .map(|b| FoundBranch {
            sign: match b.sign {
                crate::verifier::Sign::Plus => "+".into(),
                crate::verifier::Sign::Minus => "-".into(),
            },
            arg: fmt_complex(&b.arg, 30),
            arg_exact: recognize_arg(&b.arg, &b.point, ctx).map(|s| s.to_string()),
            form: b.point.form.to_string(),
            d: b.point.d,
            tau: b.point.form.tau_string(),
        })
        .collect();
    let out = FoundCm { family: fam.to_string(), t: t.to_string(), x: x.to_string(), branches };
    let text = serde_json::to_string_pretty(&out).map_err(|e| (EXIT_FAIL, e.to_string()))? + "\n";
    Ok(Output { text, code: EXIT_OK })
}

/// Significant digits in a decimal literal such as "-0.00123e5".
pub fn significant_digits(s: &str) -> usize {
    let mant = s.trim().split(['e', 'E']).next().unwrap_or("");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len()
}

fn cmd_recognize(re: &str, im: &str, d1: i64, d2: i64) -> CmdResult {
    let sig_re = significant_digits(re);
    let sig_im = significant_digits(im);
    let is_zero = |s: &str| significant_digits(s) == 0;
    let sig = match (is_zero(re), is_zero(im)) {
        (false, false) => sig_re.min(sig_im),
        (false, true) => sig_re,
        (true, false) => sig_im,
        (true, true) => RECOGNIZE_MIN_DIGITS,
    };
    if sig < RECOGNIZE_MIN_DIGITS {
        return Err((EXIT_USAGE, format!("need at least {RECOGNIZE_MIN_DIGITS} significant digits, got {sig}")));
    }
    let ctx = PrecisionContext::new(sig as u32).map_err(|e| (EXIT_USAGE, e.to_string()))?.with_guard(0);
    let p = ctx.prec();
    let parse = |s: &str| -> std::result::Result<Float, (i32, String)> {
        let v = Float::parse(s.trim()).map_err(|e| (EXIT_USAGE, format!("bad decimal {s:?}: {e}")))?;
        Ok(Float::with_val(p, v))
    };
    let v = Complex::with_val(p, (parse(re)?, parse(im)?));
    match recognize_complex(&v, d1, d2, DEFAULT_DENOM_BOUND, &ctx) {
        Ok((a, b)) => Ok(Output { text: format!("re = {a}\nim = {b}\n"), code: EXIT_OK }),
        Err(Error::NotRecognized(_)) => Ok(Output { text: "not recognized\n".into(), code: EXIT_FAIL }),
        Err(e) => Err((EXIT_USAGE, e.to_string())),
    }
}

/// Entry point for the binary; clap usage errors exit with code 2.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
