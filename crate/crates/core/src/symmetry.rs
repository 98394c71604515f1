//! The eleven symmetry cases between pairs of Bernoulli problems and
//! numerical verification of the relation each one predicts.
//!
//! Each case pairs an exponent-class requirement and parity hypotheses on
//! `(a₁, b₁)` with a sign transformation `(a₂, b₂, d₂) = (±a₁, ±b₁, ±d₁)`
//! and a relation between the solutions:
//!
//! | relation | holds when          | residual            |
//! |----------|---------------------|---------------------|
//! | origin   | `y₂(-t) = -y₁(t)`   | `y₂(-t) + y₁(t)`    |
//! | t-axis   | `y₂(t) = -y₁(t)`    | `y₂(t) + y₁(t)`     |
//! | y-axis   | `y₂(-t) = y₁(t)`    | `y₂(-t) - y₁(t)`    |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closedform::{eval_grid, validity_interval, ProblemSpec, SolveError, Validity};
use crate::exec::{self, Execution};
use crate::exponent::{ExponentClass, RationalExponent};
use crate::expr::{detect_parity, Expr, Parity};
use crate::oracle::{solve_span, OracleConfig, OracleError, Span};
use crate::quad::QuadConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    T2i,
    T2ii,
    T2iii,
    T2iv,
    T3i,
    T3ii,
    T3iii,
    T4i,
    T4ii,
    T4iii,
    T4iv,
}

impl CaseId {
    pub fn name(self) -> &'static str {
        match self {
            CaseId::T2i => "T2i",
            CaseId::T2ii => "T2ii",
            CaseId::T2iii => "T2iii",
            CaseId::T2iv => "T2iv",
            CaseId::T3i => "T3i",
            CaseId::T3ii => "T3ii",
            CaseId::T3iii => "T3iii",
            CaseId::T4i => "T4i",
            CaseId::T4ii => "T4ii",
            CaseId::T4iii => "T4iii",
            CaseId::T4iv => "T4iv",
        }
    }

    pub fn case(self) -> &'static SymmetryCase {
        CATALOG
            .iter()
            .find(|c| c.id == self)
            .expect("every id has a catalog row")
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CATALOG
            .iter()
            .map(|c| c.id)
            .find(|id| id.name() == s)
            .ok_or_else(|| format!("unknown case id `{s}` (expected T2i … T4iv)"))
    }
}

impl Serialize for CaseId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "origin")]
    Origin,
    #[serde(rename = "t-axis")]
    TAxis,
    #[serde(rename = "y-axis")]
    YAxis,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Origin => "origin",
            Relation::TAxis => "t-axis",
            Relation::YAxis => "y-axis",
        }
    }

    /// Whether the partner solution is read at `-t`.
    pub fn reflects_time(self) -> bool {
        matches!(self, Relation::Origin | Relation::YAxis)
    }

    /// Relation residual from `y₁(t)` and the partner value `y₂(±t)`.
    pub fn residual(self, y1: f64, y2: f64) -> f64 {
        match self {
            Relation::Origin | Relation::TAxis => y2 + y1,
            Relation::YAxis => y2 - y1,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Relation::Origin, Relation::TAxis, Relation::YAxis]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown relation `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Keep,
    Flip,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Keep => '+',
            Sign::Flip => '-',
        }
    }

    fn apply_expr(self, e: &Expr) -> Expr {
        match self {
            Sign::Keep => e.clone(),
            Sign::Flip => e.negated(),
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Sign::Keep => x,
            Sign::Flip => -x,
        }
    }
}

/// `(a₂, b₂, d₂)` relative to `(a₁, b₁, d₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transform {
    pub a: Sign,
    pub b: Sign,
    pub d: Sign,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |s: Sign, name: &str| match s {
            Sign::Keep => format!("{name}2={name}1"),
            Sign::Flip => format!("{name}2=-{name}1"),
        };
        write!(
            f,
            "{},{},{}",
            term(self.a, "a"),
            term(self.b, "b"),
            term(self.d, "d")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassRequirement {
    /// `p` even, `q` odd.
    EvenOverOdd,
    /// `p`, `q` both odd, `n = 1` included.
    OddOverOdd,
    AnyRational,
}

impl ClassRequirement {
    pub fn admits(self, n: &RationalExponent) -> bool {
        match self {
            ClassRequirement::EvenOverOdd => n.class() == ExponentClass::EvenOverOdd,
            ClassRequirement::OddOverOdd => {
                matches!(n.class(), ExponentClass::OddOverOdd | ExponentClass::One)
            }
            ClassRequirement::AnyRational => true,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ClassRequirement::EvenOverOdd => "n = p/q with p even and q odd",
            ClassRequirement::OddOverOdd => "n = p/q with p and q odd",
            ClassRequirement::AnyRational => "any rational n",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymmetryCase {
    pub id: CaseId,
    pub class: ClassRequirement,
    /// Required parities of `(a₁, b₁)`.
    pub parity: Option<(Parity, Parity)>,
    pub transform: Transform,
    pub relation: Relation,
}

const fn row(
    id: CaseId,
    class: ClassRequirement,
    parity: Option<(Parity, Parity)>,
    signs: (Sign, Sign, Sign),
    relation: Relation,
) -> SymmetryCase {
    SymmetryCase {
        id,
        class,
        parity,
        transform: Transform {
            a: signs.0,
            b: signs.1,
            d: signs.2,
        },
        relation,
    }
}

use ClassRequirement::{AnyRational, EvenOverOdd as EO, OddOverOdd as OO};
use Parity::{Even, Odd};
use Sign::{Flip as M, Keep as P};

/// The full table, in the stable order `T2i … T4iv`.
///
/// | id    | n = p/q         | a₁, b₁      | a₂, b₂, d₂ | relation |
/// |-------|-----------------|-------------|------------|----------|
/// | T2i   | p even, q odd   | even, odd   | −, −, −    | origin   |
/// | T2ii  | p even, q odd   | odd, even   | +, +, −    | origin   |
/// | T2iii | p even, q odd   | even, even  | −, +, −    | origin   |
/// | T2iv  | p even, q odd   | any         | +, −, −    | t-axis   |
/// | T3i   | any             | even, odd   | −, +, +    | y-axis   |
/// | T3ii  | any             | odd, even   | +, −, +    | y-axis   |
/// | T3iii | any             | even, even  | −, −, +    | y-axis   |
/// | T4i   | p, q odd        | odd, even   | +, −, −    | origin   |
/// | T4ii  | p, q odd        | any         | +, +, −    | t-axis   |
/// | T4iii | p, q odd        | even, odd   | −, +, −    | origin   |
/// | T4iv  | p, q odd        | even, even  | −, −, −    | origin   |
///
/// For `d₁ < 0` the y-axis rows additionally need `p` even and `q` odd or
/// both odd.
///
/// ```
/// use bsym::expr::Parity::{Even, Odd};
/// use bsym::symmetry::{CaseId, ClassRequirement, Relation, CATALOG};
///
/// let table: Vec<String> = CATALOG
///     .iter()
///     .map(|c| {
///         let t = c.transform;
///         let signs: String = [t.a, t.b, t.d].iter().map(|s| s.symbol()).collect();
///         format!("{} {} {}", c.id, signs, c.relation)
///     })
///     .collect();
/// assert_eq!(
///     table,
///     [
///         "T2i --- origin", "T2ii ++- origin", "T2iii -+- origin", "T2iv +-- t-axis",
///         "T3i -++ y-axis", "T3ii +-+ y-axis", "T3iii --+ y-axis",
///         "T4i +-- origin", "T4ii ++- t-axis", "T4iii -+- origin", "T4iv --- origin",
///     ]
/// );
/// let t3 = CATALOG.iter().filter(|c| c.class == ClassRequirement::AnyRational);
/// assert_eq!(t3.count(), 3);
/// assert_eq!(CaseId::T4iii.case().parity, Some((Even, Odd)));
/// assert_eq!(CaseId::T2iv.case().parity, None);
/// assert_eq!(CaseId::T3ii.case().relation, Relation::YAxis);
/// ```
pub static CATALOG: [SymmetryCase; 11] = [
    row(
        CaseId::T2i,
        EO,
        Some((Even, Odd)),
        (M, M, M),
        Relation::Origin,
    ),
    row(
        CaseId::T2ii,
        EO,
        Some((Odd, Even)),
        (P, P, M),
        Relation::Origin,
    ),
    row(
        CaseId::T2iii,
        EO,
        Some((Even, Even)),
        (M, P, M),
        Relation::Origin,
    ),
    row(CaseId::T2iv, EO, None, (P, M, M), Relation::TAxis),
    row(
        CaseId::T3i,
        AnyRational,
        Some((Even, Odd)),
        (M, P, P),
        Relation::YAxis,
    ),
    row(
        CaseId::T3ii,
        AnyRational,
        Some((Odd, Even)),
        (P, M, P),
        Relation::YAxis,
    ),
    row(
        CaseId::T3iii,
        AnyRational,
        Some((Even, Even)),
        (M, M, P),
        Relation::YAxis,
    ),
    row(
        CaseId::T4i,
        OO,
        Some((Odd, Even)),
        (P, M, M),
        Relation::Origin,
    ),
    row(CaseId::T4ii, OO, None, (P, P, M), Relation::TAxis),
    row(
        CaseId::T4iii,
        OO,
        Some((Even, Odd)),
        (M, P, M),
        Relation::Origin,
    ),
    row(
        CaseId::T4iv,
        OO,
        Some((Even, Even)),
        (M, M, M),
        Relation::Origin,
    ),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("case {case} does not apply: {reason}")]
    CaseNotApplicable { case: CaseId, reason: String },
    #[error("case {case}: the common validity interior is empty")]
    EmptyDomain { case: CaseId },
    #[error("grid needs at least 3 points, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Parities of `(a, b)`; a coefficient whose sampling fails counts as
/// `Neither`.
fn coefficient_parities(p: &ProblemSpec) -> (Parity, Parity) {
    let parity = |e: &Expr| detect_parity(e).unwrap_or(Parity::Neither);
    (parity(&p.a), parity(&p.b))
}

fn applicability(
    p: &ProblemSpec,
    c: &SymmetryCase,
    parities: (Parity, Parity),
) -> Result<(), String> {
    if !c.class.admits(&p.n) {
        return Err(format!(
            "requires {}, but n = {} is {}",
            c.class.describe(),
            p.n,
            p.n.class().name()
        ));
    }
    if let Some((need_a, need_b)) = c.parity {
        if parities != (need_a, need_b) {
            return Err(format!(
                "requires a1 {need_a} and b1 {need_b}, but a1 is {} and b1 is {}",
                parities.0, parities.1
            ));
        }
    }
    if c.relation == Relation::YAxis
        && p.d < 0.0
        && !matches!(
            p.n.class(),
            ExponentClass::EvenOverOdd | ExponentClass::OddOverOdd | ExponentClass::One
        )
    {
        return Err(format!(
            "a negative initial value needs p even and q odd, or p and q odd; n = {}",
            p.n
        ));
    }
    Ok(())
}

/// Why `c` does not apply to `p`, or `Ok(())`.
pub fn check_applicable(p: &ProblemSpec, c: &SymmetryCase) -> Result<(), SymmetryError> {
    applicability(p, c, coefficient_parities(p))
        .map_err(|reason| SymmetryError::CaseNotApplicable { case: c.id, reason })
}

/// All catalog rows whose hypotheses hold for `p`, in catalog order.
pub fn applicable_cases(p: &ProblemSpec) -> Vec<SymmetryCase> {
    let parities = coefficient_parities(p);
    CATALOG
        .iter()
        .filter(|c| applicability(p, c, parities).is_ok())
        .copied()
        .collect()
}

/// The partner problem prescribed by `c`, without checking hypotheses.
pub fn force_transform(p: &ProblemSpec, c: &SymmetryCase) -> ProblemSpec {
    ProblemSpec {
        a: c.transform.a.apply_expr(&p.a),
        b: c.transform.b.apply_expr(&p.b),
        n: p.n,
        d: c.transform.d.apply(p.d),
    }
}

pub fn transform_problem(p: &ProblemSpec, c: &SymmetryCase) -> Result<ProblemSpec, SymmetryError> {
    check_applicable(p, c)?;
    Ok(force_transform(p, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    /// Both solutions from the closed form.
    ClosedForm,
    /// Both solutions from direct integration of the ODEs.
    #[default]
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed",
            Method::Oracle => "oracle",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed" => Ok(Method::ClosedForm),
            "oracle" => Ok(Method::Oracle),
            _ => Err(format!("unknown method `{s}` (expected closed or oracle)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// How far each validity search reaches from `t = 0`.
    pub search_radius: f64,
    /// Fraction of the common interval dropped at each end.
    pub margin: f64,
    pub quad: QuadConfig,
    pub oracle: OracleConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            search_radius: 3.0,
            margin: 0.01,
            quad: QuadConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub case: CaseId,
    pub relation: Relation,
    pub method: Method,
    pub grid: Vec<f64>,
    /// Signed relation residual at each grid point.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_abs_y1: f64,
    pub common_validity: Validity,
    pub tol: f64,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            case: self.case,
            relation: self.relation,
            max_residual: self.max_residual,
            grid_size: self.grid.len(),
            validity: self.common_validity,
            verdict: self.verdict,
        }
    }
}

/// The JSON record written for each verified case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub case: CaseId,
    pub relation: Relation,
    pub max_residual: f64,
    pub grid_size: usize,
    pub validity: Validity,
    pub verdict: Verdict,
}

pub fn verify_pair(
    p1: &ProblemSpec,
    c: &SymmetryCase,
    grid_points: usize,
    tol: f64,
    method: Method,
) -> Result<VerificationReport, SymmetryError> {
    verify_pair_with(p1, c, grid_points, tol, method, &VerifyOptions::default())
}

pub fn verify_pair_with(
    p1: &ProblemSpec,
    c: &SymmetryCase,
    grid_points: usize,
    tol: f64,
    method: Method,
    opts: &VerifyOptions,
) -> Result<VerificationReport, SymmetryError> {
    check_applicable(p1, c)?;
    verify_unchecked(p1, c, grid_points, tol, method, opts)
}

enum Solved {
    Closed(Validity),
    Oracle(Span),
}

impl Solved {
    fn validity(&self) -> Validity {
        match self {
            Solved::Closed(v) => *v,
            Solved::Oracle(span) => span.validity(),
        }
    }
}

fn solve(p: &ProblemSpec, method: Method, opts: &VerifyOptions) -> Result<Solved, SymmetryError> {
    let r = opts.search_radius;
    Ok(match method {
        Method::ClosedForm => Solved::Closed(validity_interval(p, r, &opts.quad)?),
        Method::Oracle => Solved::Oracle(solve_span(p, -r, r, &opts.oracle)?),
    })
}

fn sample(
    p: &ProblemSpec,
    solved: &Solved,
    ts: &[f64],
    opts: &VerifyOptions,
) -> Result<Vec<f64>, SymmetryError> {
    match solved {
        Solved::Closed(_) => eval_grid(p, ts, &opts.quad)?
            .into_iter()
            .map(|y| y.map_err(SymmetryError::from))
            .collect(),
        Solved::Oracle(span) => ts
            .iter()
            .map(|&t| {
                span.eval(t)
                    .ok_or(SymmetryError::Oracle(OracleError::StepFailure { t }))
            })
            .collect(),
    }
}

/// Verification of the relation predicted by `c` without checking that its
/// hypotheses hold. With violated hypotheses the residual is expected to be
/// large; this is how counterexamples are built.
pub fn verify_unchecked(
    p1: &ProblemSpec,
    c: &SymmetryCase,
    grid_points: usize,
    tol: f64,
    method: Method,
    opts: &VerifyOptions,
) -> Result<VerificationReport, SymmetryError> {
    if grid_points < 3 {
        return Err(SymmetryError::GridTooSmall(grid_points));
    }
    let p2 = force_transform(p1, c);
    let (s1, s2) = exec::join(|| solve(p1, method, opts), || solve(&p2, method, opts));
    let (s1, s2) = (s1?, s2?);

    let v2 = s2.validity();
    let v2 = if c.relation.reflects_time() {
        v2.reflected()
    } else {
        v2
    };
    let common = s1.validity().intersect(&v2);
    let (lo, hi) = common.interior(opts.margin);
    if lo >= hi {
        return Err(SymmetryError::EmptyDomain { case: c.id });
    }
    let last = (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| lo + (hi - lo) * i as f64 / last)
        .collect();
    let (y1, residuals) = relation_values(p1, &p2, c, (&s1, &s2), &grid, opts)?;
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let max_abs_y1 = y1.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let verdict = if max_residual <= tol * (1.0 + max_abs_y1) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerificationReport {
        case: c.id,
        relation: c.relation,
        method,
        grid,
        residuals,
        max_residual,
        max_abs_y1,
        common_validity: common,
        tol,
        verdict,
    })
}

/// `y₁` and the relation residual at each point of `grid`.
fn relation_values(
    p1: &ProblemSpec,
    p2: &ProblemSpec,
    c: &SymmetryCase,
    (s1, s2): (&Solved, &Solved),
    grid: &[f64],
    opts: &VerifyOptions,
) -> Result<(Vec<f64>, Vec<f64>), SymmetryError> {
    let partner_ts: Vec<f64> = if c.relation.reflects_time() {
        grid.iter().map(|t| -t).collect()
    } else {
        grid.to_vec()
    };
    let (y1, y2) = exec::join(
        || sample(p1, s1, grid, opts),
        || sample(p2, s2, &partner_ts, opts),
    );
    let (y1, y2) = (y1?, y2?);
    let residuals = y1
        .iter()
        .zip(&y2)
        .map(|(&a, &b)| c.relation.residual(a, b))
        .collect();
    Ok((y1, residuals))
}

/// Signed relation residuals of `c` on a caller-chosen grid, which must lie
/// inside the common validity interval of the chosen method.
pub fn residuals_on_grid(
    p1: &ProblemSpec,
    c: &SymmetryCase,
    grid: &[f64],
    method: Method,
    opts: &VerifyOptions,
) -> Result<Vec<f64>, SymmetryError> {
    let p2 = force_transform(p1, c);
    let (s1, s2) = exec::join(|| solve(p1, method, opts), || solve(&p2, method, opts));
    let (s1, s2) = (s1?, s2?);
    Ok(relation_values(p1, &p2, c, (&s1, &s2), grid, opts)?.1)
}

/// Verifies every applicable case of `p`, in catalog order.
pub fn verify_all(
    p: &ProblemSpec,
    grid_points: usize,
    tol: f64,
    method: Method,
    opts: &VerifyOptions,
    exec: Execution,
) -> Vec<Result<VerificationReport, SymmetryError>> {
    let cases = applicable_cases(p);
    exec.map(&cases, |c| {
        verify_unchecked(p, c, grid_points, tol, method, opts)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::classify_exponent;
    use crate::expr::parse_expr;

    fn spec(a: &str, b: &str, n: (i64, i64), d: f64) -> ProblemSpec {
        ProblemSpec::new(
            parse_expr(a).unwrap(),
            parse_expr(b).unwrap(),
            classify_exponent(n.0, n.1).unwrap(),
            d,
        )
        .unwrap()
    }

    fn ids(cases: &[SymmetryCase]) -> Vec<CaseId> {
        cases.iter().map(|c| c.id).collect()
    }

    #[test]
    fn catalog_shape() {
        assert_eq!(CATALOG.len(), 11);
        let mut seen: Vec<CaseId> = CATALOG.iter().map(|c| c.id).collect();
        seen.dedup();
        assert_eq!(seen.len(), 11);
        for c in &CATALOG {
            // y-axis rows keep d, the others flip it
            let keeps_d = c.transform.d == Sign::Keep;
            assert_eq!(keeps_d, c.relation == Relation::YAxis, "{}", c.id);
            assert_eq!(c.id.name().parse::<CaseId>().unwrap(), c.id);
        }
    }

    #[test]
    fn applicable_examples() {
        let p = spec("cos(t)", "sin(t)", (2, 1), 1.0);
        assert_eq!(
            ids(&applicable_cases(&p)),
            [CaseId::T2i, CaseId::T2iv, CaseId::T3i]
        );
        let p = spec("t", "cos(t)", (3, 1), -1.0);
        assert_eq!(
            ids(&applicable_cases(&p)),
            [CaseId::T3ii, CaseId::T4i, CaseId::T4ii]
        );
        let p = spec("t+1", "t+1", (1, 2), 1.0);
        assert!(applicable_cases(&p).is_empty());
    }

    #[test]
    fn transform_examples() {
        let p = spec("cos(t)", "sin(t)", (2, 1), 1.0);
        let q = transform_problem(&p, CaseId::T2iv.case()).unwrap();
        assert_eq!(q.a.to_string(), "cos(t)");
        assert_eq!(q.b.to_string(), "-(sin(t))");
        assert_eq!(q.d, -1.0);

        let p = spec("cos(t)", "t^2", (2, 1), 0.5);
        let q = transform_problem(&p, CaseId::T3iii.case()).unwrap();
        assert_eq!(
            (q.a.to_string(), q.b.to_string(), q.d),
            ("-(cos(t))".to_string(), "-(t^2)".to_string(), 0.5)
        );

        let p = spec("t", "1", (3, 1), -2.0);
        let q = transform_problem(&p, CaseId::T4ii.case()).unwrap();
        assert_eq!(
            (q.a.to_string(), q.b.to_string(), q.d),
            ("t".into(), "1".into(), 2.0)
        );

        let p = spec("cos(t)", "sin(t)", (2, 1), 1.0);
        let err = transform_problem(&p, CaseId::T4i.case()).unwrap_err();
        assert!(matches!(
            err,
            SymmetryError::CaseNotApplicable {
                case: CaseId::T4i,
                ..
            }
        ));
    }

    #[test]
    fn transform_is_an_involution() {
        let p = spec("cos(t)", "sin(t)", (3, 1), 1.5);
        for c in &CATALOG {
            let twice = force_transform(&force_transform(&p, c), c);
            assert_eq!((twice.n, twice.d), (p.n, p.d));
            for i in 0..100 {
                let t = -4.0 + 0.08 * i as f64;
                assert_eq!(twice.a.eval(t).unwrap(), p.a.eval(t).unwrap());
                assert_eq!(twice.b.eval(t).unwrap(), p.b.eval(t).unwrap());
            }
        }
    }

    #[test]
    fn negative_d_restricts_y_axis_rows() {
        // odd/even n forbids d < 0 already at the problem level
        let n = classify_exponent(1, 2).unwrap();
        let p = ProblemSpec {
            a: parse_expr("cos(t)").unwrap(),
            b: parse_expr("sin(t)").unwrap(),
            n,
            d: -1.0,
        };
        assert!(applicable_cases(&p)
            .iter()
            .all(|c| c.relation != Relation::YAxis));
        let p = spec("cos(t)", "sin(t)", (1, 1), -1.0);
        assert!(ids(&applicable_cases(&p)).contains(&CaseId::T3i));
    }

    #[test]
    fn verify_examples() {
        let p = spec("cos(t)", "sin(t)", (2, 1), 1.0);
        let r = verify_pair(&p, CaseId::T2i.case(), 51, 1e-6, Method::Oracle).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.grid.len(), 51);

        let p = spec("t", "1", (3, 1), -2.0);
        let r = verify_pair(&p, CaseId::T4ii.case(), 51, 1e-6, Method::ClosedForm).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.relation, Relation::TAxis);

        let p = spec("cos(t)", "sin(t)", (2, 1), 1.0);
        assert!(matches!(
            verify_pair(&p, CaseId::T4i.case(), 51, 1e-6, Method::Oracle),
            Err(SymmetryError::CaseNotApplicable { .. })
        ));
        assert!(matches!(
            verify_pair(&p, CaseId::T2i.case(), 2, 1e-6, Method::Oracle),
            Err(SymmetryError::GridTooSmall(2))
        ));
    }

    #[test]
    fn riccati_t_axis_is_analytic() {
        // y₁ = 1/(1-t); partner y' = -y², y(0) = -1 gives y₂ = -1/(1-t)
        let p = spec("0", "1", (2, 1), 1.0);
        let r = verify_pair(&p, CaseId::T2iv.case(), 51, 1e-6, Method::ClosedForm).unwrap();
        assert!(r.max_residual <= 1e-8, "{}", r.max_residual);
        assert!(r.common_validity.hi < 1.0);
    }

    #[test]
    fn violated_hypotheses_show_up() {
        let p = spec("cos(t)", "t + 1", (2, 1), 0.5);
        let r = verify_unchecked(
            &p,
            CaseId::T2i.case(),
            51,
            1e-6,
            Method::Oracle,
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(!r.passed());
        assert!(r.max_residual > 1e-2);
    }

    #[test]
    fn verify_all_is_ordered_and_parallel_safe() {
        let p = spec("cos(t)", "sin(t)", (2, 1), 1.0);
        let opts = VerifyOptions::default();
        let seq = verify_all(&p, 21, 1e-6, Method::Oracle, &opts, Execution::Sequential);
        let par = verify_all(&p, 21, 1e-6, Method::Oracle, &opts, Execution::Parallel);
        let ids = |v: &[Result<VerificationReport, SymmetryError>]| {
            v.iter()
                .map(|r| r.as_ref().unwrap().case)
                .collect::<Vec<_>>()
        };
        assert_eq!(ids(&seq), [CaseId::T2i, CaseId::T2iv, CaseId::T3i]);
        assert_eq!(ids(&seq), ids(&par));
        for (a, b) in seq.iter().zip(&par) {
            assert_eq!(a.as_ref().unwrap().residuals, b.as_ref().unwrap().residuals);
        }
    }
}
