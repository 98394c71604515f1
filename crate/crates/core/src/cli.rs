//! The `bsym` command line.
//!
//! Exit codes: 0 success, 1 parse or usage error, 2 domain or quadrature
//! failure, 3 inapplicable case, 4 verification failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use crate::closedform::{eval_grid, validity_interval, EndKind, ProblemSpec, Validity};
use crate::exec::Execution;
use crate::exponent::RationalExponent;
use crate::expr::{detect_parity, parse_expr, Expr};
use crate::oracle::{solve_span, OracleConfig};
use crate::quad::{identity_sides, Identity, QuadConfig};
use crate::symmetry::{
    applicable_cases, check_applicable, transform_problem, verify_all, verify_pair_with, CaseId,
    Method, Relation, SymmetryError, VerificationReport, VerifyOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_INAPPLICABLE: i32 = 3;
pub const EXIT_FAIL: i32 = 4;

/// Largest identity residual accepted by `identities`.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Grid points this close to a singular validity end are not tabulated.
const END_SLACK: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "bsym",
    version,
    about = "Closed-form Bernoulli solutions and their symmetric partners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the solution of a problem as CSV.
    Solve(SolveArgs),
    /// List the symmetry cases whose hypotheses the problem satisfies.
    Cases(ProblemArg),
    /// Write the partner problem prescribed by a case.
    Pair(PairArgs),
    /// Check the predicted relation numerically and write a JSON report.
    Verify(VerifyArgs),
    /// Print residuals of the weighted-integral reflection identities.
    Identities(IdentityArgs),
}

#[derive(Debug, Args)]
struct ProblemArg {
    /// JSON problem file with keys a, b, n, d.
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Closed,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Closed => Method::ClosedForm,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
    method: MethodArg,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[arg(long)]
    case: CaseId,
    /// Output JSON path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum CaseSelection {
    All,
    One(CaseId),
}

fn parse_selection(s: &str) -> Result<CaseSelection, String> {
    if s == "all" {
        Ok(CaseSelection::All)
    } else {
        s.parse().map(CaseSelection::One)
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArg,
    /// A case id or `all`.
    #[arg(long, default_value = "all", value_parser = parse_selection)]
    case: CaseSelection,
    #[arg(long, default_value_t = 51)]
    points: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Oracle)]
    method: MethodArg,
    /// Output JSON path; standard output when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IdentityArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    #[arg(long, allow_hyphen_values = true)]
    n: String,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    t_max: f64,
    #[arg(long, default_value_t = 8)]
    samples: usize,
}

/// A diagnostic and the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }
}

impl From<SymmetryError> for Failure {
    fn from(e: SymmetryError) -> Self {
        let code = match e {
            SymmetryError::CaseNotApplicable { .. } => EXIT_INAPPLICABLE,
            SymmetryError::GridTooSmall(_) => EXIT_PARSE,
            _ => EXIT_DOMAIN,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn string_or_number<'de, D: Deserializer<'de>>(de: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Scalar {
        Text(String),
        Number(serde_json::Number),
    }
    Ok(match Scalar::deserialize(de)? {
        Scalar::Text(s) => s,
        Scalar::Number(n) => n.to_string(),
    })
}

/// On-disk form of a problem. `n` and `d` are text but numbers are accepted
/// on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub a: String,
    pub b: String,
    #[serde(deserialize_with = "string_or_number")]
    pub n: String,
    #[serde(deserialize_with = "string_or_number")]
    pub d: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
}

impl ProblemFile {
    pub fn from_spec(p: &ProblemSpec, relation: Option<Relation>) -> Self {
        ProblemFile {
            a: p.a.to_string(),
            b: p.b.to_string(),
            n: p.n.to_string(),
            d: format_number(p.d),
            relation,
        }
    }

    pub fn to_spec(&self) -> Result<ProblemSpec, Failure> {
        let a = parse_coefficient("a", &self.a)?;
        let b = parse_coefficient("b", &self.b)?;
        let n = parse_exponent(&self.n)?;
        let d: f64 = self
            .d
            .trim()
            .parse()
            .map_err(|_| Failure::parse(format!("d: `{}` is not a decimal number", self.d)))?;
        ProblemSpec::new(a, b, n, d).map_err(|e| Failure::parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
    }
}

fn parse_coefficient(name: &str, text: &str) -> Result<Expr, Failure> {
    parse_expr(text).map_err(|e| Failure::parse(format!("{name}: {e} in `{text}`")))
}

fn parse_exponent(text: &str) -> Result<RationalExponent, Failure> {
    text.trim()
        .parse()
        .map_err(|e| Failure::parse(format!("n: {e}")))
}

fn load_problem(arg: &ProblemArg) -> Result<ProblemSpec, Failure> {
    ProblemFile::load(&arg.problem)?.to_spec()
}

/// Shortest text that reads back to the same `f64`, with `.` as decimal
/// separator. Very small or large magnitudes use exponent notation.
pub fn format_number(x: f64) -> String {
    let m = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&m) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::parse(format!("stdout: {e}"))),
    }
}

fn near_singular_end(v: &Validity, t: f64) -> bool {
    let singular = |k: EndKind| matches!(k, EndKind::Asymptote | EndKind::RootBoundary);
    (singular(v.hi_kind) && (v.hi - t).abs() <= END_SLACK)
        || (singular(v.lo_kind) && (t - v.lo).abs() <= END_SLACK)
}

fn cmd_solve(args: &SolveArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_problem(&args.problem)?;
    let (t_min, t_max) = (args.t_min, args.t_max);
    if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
        return Err(Failure::parse("need finite --t-min < --t-max"));
    }
    if args.points < 2 {
        return Err(Failure::parse("need --points >= 2"));
    }
    let last = (args.points - 1) as f64;
    let ts: Vec<f64> = (0..args.points)
        .map(|i| {
            if i + 1 == args.points {
                t_max
            } else {
                t_min + (t_max - t_min) * i as f64 / last
            }
        })
        .collect();

    let (validity, values): (Validity, Vec<Option<f64>>) = match Method::from(args.method) {
        Method::ClosedForm => {
            let radius = t_min.abs().max(t_max.abs());
            let cfg = QuadConfig::default();
            let v =
                validity_interval(&p, radius, &cfg).map_err(|e| Failure::domain(e.to_string()))?;
            let keep = |t: f64| v.contains(t) && !near_singular_end(&v, t);
            let inside: Vec<f64> = ts.iter().copied().filter(|&t| keep(t)).collect();
            let ys = eval_grid(&p, &inside, &cfg).map_err(|e| Failure::domain(e.to_string()))?;
            let mut values = Vec::with_capacity(ys.len());
            for y in ys {
                values.push(Some(y.map_err(|e| Failure::domain(e.to_string()))?));
            }
            let mut it = values.into_iter();
            let all = ts
                .iter()
                .map(|&t| if keep(t) { it.next().flatten() } else { None })
                .collect();
            (v, all)
        }
        Method::Oracle => {
            let span = solve_span(&p, t_min.min(0.0), t_max.max(0.0), &OracleConfig::default())
                .map_err(|e| Failure::domain(e.to_string()))?;
            let v = span.validity();
            let all = ts
                .iter()
                .map(|&t| if v.contains(t) { span.eval(t) } else { None })
                .collect();
            (v, all)
        }
    };

    let mut csv = String::from("t,y\n");
    for (&t, y) in ts.iter().zip(&values) {
        if let Some(y) = y {
            let _ = writeln!(csv, "{},{}", format_number(t), format_number(*y));
        }
    }
    let _ = writeln!(
        csv,
        "# validity: [{},{}] {} {}",
        format_number(validity.lo),
        format_number(validity.hi),
        validity.lo_kind.name(),
        validity.hi_kind.name()
    );
    emit(args.out.as_deref(), &csv, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_cases(args: &ProblemArg, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_problem(args)?;
    let mut text = String::new();
    for c in applicable_cases(&p) {
        let _ = writeln!(text, "{}\t{}\t{}", c.id, c.relation, c.transform);
    }
    emit(None, &text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_pair(args: &PairArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_problem(&args.problem)?;
    let case = args.case.case();
    let q = transform_problem(&p, case)?;
    let file = ProblemFile::from_spec(&q, Some(case.relation));
    let mut text = serde_json::to_string_pretty(&file).expect("problem files serialize");
    text.push('\n');
    emit(args.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_verify(
    args: &VerifyArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let p = load_problem(&args.problem)?;
    if args.points < 3 {
        return Err(Failure::parse("need --points >= 3"));
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Failure::parse("need --tol > 0"));
    }
    let method = Method::from(args.method);
    let opts = VerifyOptions::default();
    let results: Vec<Result<VerificationReport, SymmetryError>> = match args.case {
        CaseSelection::One(id) => {
            check_applicable(&p, id.case())?;
            vec![verify_pair_with(
                &p,
                id.case(),
                args.points,
                args.tol,
                method,
                &opts,
            )]
        }
        CaseSelection::All => verify_all(
            &p,
            args.points,
            args.tol,
            method,
            &opts,
            Execution::Parallel,
        ),
    };

    let mut code = EXIT_OK;
    let mut summaries = Vec::new();
    for r in results {
        match r {
            Ok(report) => {
                if !report.passed() {
                    let _ = writeln!(
                        stderr,
                        "case {}: max residual {} exceeds {}",
                        report.case,
                        format_number(report.max_residual),
                        format_number(report.tol * (1.0 + report.max_abs_y1))
                    );
                    if code == EXIT_OK {
                        code = EXIT_FAIL;
                    }
                }
                summaries.push(report.summary());
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                code = Failure::from(e).code;
            }
        }
    }
    let mut text = serde_json::to_string_pretty(&summaries).expect("reports serialize");
    text.push('\n');
    emit(args.report.as_deref(), &text, stdout)?;
    Ok(code)
}

fn cmd_identities(
    args: &IdentityArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let a = parse_coefficient("a", &args.a)?;
    let b = parse_coefficient("b", &args.b)?;
    let n = parse_exponent(&args.n)?;
    if !(args.t_max.is_finite() && args.t_max > 0.0) {
        return Err(Failure::parse("need finite --t-max > 0"));
    }
    if args.samples == 0 {
        return Err(Failure::parse("need --samples >= 1"));
    }
    let parities = (
        detect_parity(&a).map_err(|e| Failure::domain(e.to_string()))?,
        detect_parity(&b).map_err(|e| Failure::domain(e.to_string()))?,
    );
    let cfg = QuadConfig::default();
    let mut code = EXIT_OK;
    let mut text = String::from("identity\tt\tresidual\n");
    for id in Identity::ALL {
        let (need_a, need_b) = id.requires();
        if parities != (need_a, need_b) {
            let _ = writeln!(text, "# {id} skipped: requires a {need_a} and b {need_b}");
            continue;
        }
        for k in 1..=args.samples {
            let t = args.t_max * k as f64 / args.samples as f64;
            let sides = identity_sides(id, &a, &b, &n, t, &cfg)
                .map_err(|e| Failure::domain(e.to_string()))?;
            let r = sides.residual();
            if r.is_nan() || r > IDENTITY_TOL {
                let _ = writeln!(
                    stderr,
                    "{id} at t = {}: residual {} exceeds 1e-8",
                    format_number(t),
                    format_number(r)
                );
                code = EXIT_FAIL;
            }
            let _ = writeln!(text, "{id}\t{}\t{}", format_number(t), format_number(r));
        }
    }
    emit(None, &text, stdout)?;
    Ok(code)
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_PARSE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Cases(a) => cmd_cases(a, stdout),
        Command::Pair(a) => cmd_pair(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
        Command::Identities(a) => cmd_identities(a, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [
            0.0,
            1.0,
            -2.5,
            0.1 + 0.2,
            1.0 / 3.0,
            1e-7,
            6.02e23,
            -1e-300,
            12345.678,
        ] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(
                s.chars().filter(|c| c.is_ascii_digit()).count() <= 17 + 3,
                "{s}"
            );
        }
        assert_eq!(format_number(-1.0), "-1");
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(1e-7), "1e-7");
    }

    #[test]
    fn problem_file_accepts_numbers_and_rejects_unknown_keys() {
        let f: ProblemFile = serde_json::from_str(r#"{"a":"t","b":"1","n":3,"d":-2}"#).unwrap();
        assert_eq!((f.n.as_str(), f.d.as_str()), ("3", "-2"));
        assert!(f.to_spec().is_ok());
        assert!(
            serde_json::from_str::<ProblemFile>(r#"{"a":"t","b":"1","n":"3","d":"1","e":0}"#)
                .is_err()
        );
        assert!(serde_json::from_str::<ProblemFile>(r#"{"a":"t","b":"1","n":"3"}"#).is_err());
    }

    #[test]
    fn problem_file_round_trips_through_spec() {
        let f = ProblemFile {
            a: "cos(t)".into(),
            b: "-(sin(t))".into(),
            n: "2/3".into(),
            d: "-1.5".into(),
            relation: None,
        };
        assert_eq!(ProblemFile::from_spec(&f.to_spec().unwrap(), None), f);
    }
}
