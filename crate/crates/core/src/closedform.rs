//! Closed-form solution of `y' = a(t) y + b(t) y^n`, `y(0) = d`.
//!
//! For `n ≠ 1` the solution is
//!
//! ```text
//! y(t) = σ · e^{A(t)} · G(t)^{-1/(n-1)},   G(t) = d^{1-n} - (n-1) B(t)
//! ```
//!
//! with `A`, `B` from [`crate::quad`]. Every power is taken through
//! [`signed_pow`] with its exponent held as an exact fraction, so the parity
//! of each root is decided exactly. `σ = sign(d)` when `p` and `q` are both
//! odd and `+1` otherwise. For `n = 1`, `y(t) = d · e^{∫₀ᵗ (a + b)}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponent::{signed_pow, ExponentClass, ExponentError, Rational, RationalExponent};
use crate::expr::Expr;
use crate::quad::{integrate_fn, NestedIntegrator, QuadConfig, QuadError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Domain(#[from] ExponentError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("t = {t} lies outside the validity interval (radicand {radicand})")]
    OutsideValidity { t: f64, radicand: f64 },
}

/// One Bernoulli initial-value problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub a: Expr,
    pub b: Expr,
    pub n: RationalExponent,
    pub d: f64,
}

impl ProblemSpec {
    pub fn new(a: Expr, b: Expr, n: RationalExponent, d: f64) -> Result<Self, SolveError> {
        let spec = ProblemSpec { a, b, n, d };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !self.d.is_finite() || self.d == 0.0 {
            return Err(SolveError::InvalidProblem(format!(
                "initial value must be a nonzero real, got {}",
                self.d
            )));
        }
        if self.n.class() == ExponentClass::OddOverEven && self.d < 0.0 {
            return Err(SolveError::InvalidProblem(format!(
                "n = {} has an even denominator; the initial value must be positive",
                self.n
            )));
        }
        Ok(())
    }
}

/// Why an end of the validity interval stops where it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndKind {
    /// The radicand reaches zero under a negative root exponent: `|y| → ∞`.
    Asymptote,
    /// The radicand reaches zero where the solution loses realness or
    /// uniqueness (`y → 0`).
    RootBoundary,
    /// No end exists (`n = 1`); reported at the search radius.
    Unbounded,
    /// Nothing found within the search radius.
    SearchLimit,
}

impl EndKind {
    pub fn name(self) -> &'static str {
        match self {
            EndKind::Asymptote => "asymptote",
            EndKind::RootBoundary => "root-boundary",
            EndKind::Unbounded => "unbounded",
            EndKind::SearchLimit => "search-limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub lo: f64,
    pub hi: f64,
    pub lo_kind: EndKind,
    pub hi_kind: EndKind,
}

impl Validity {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    /// The interval shrunk by `frac` of its length at each end.
    pub fn interior(&self, frac: f64) -> (f64, f64) {
        let margin = frac * self.length();
        (self.lo + margin, self.hi - margin)
    }

    /// `t ↦ -t` image.
    pub fn reflected(&self) -> Validity {
        Validity {
            lo: -self.hi,
            hi: -self.lo,
            lo_kind: self.hi_kind,
            hi_kind: self.lo_kind,
        }
    }

    pub fn intersect(&self, other: &Validity) -> Validity {
        let (lo, lo_kind) = if self.lo >= other.lo {
            (self.lo, self.lo_kind)
        } else {
            (other.lo, other.lo_kind)
        };
        let (hi, hi_kind) = if self.hi <= other.hi {
            (self.hi, self.hi_kind)
        } else {
            (other.hi, other.hi_kind)
        };
        Validity {
            lo,
            hi,
            lo_kind,
            hi_kind,
        }
    }
}

/// Exponent bookkeeping for the `n ≠ 1` formula.
#[derive(Debug, Clone, Copy)]
struct Branch {
    /// `n - 1`
    k: Rational,
    /// `d^{1-n}`, the radicand at `t = 0`.
    g0: f64,
    /// `-1/(n-1)`
    root: Rational,
    sigma: f64,
    /// The radicand must stay strictly positive.
    needs_positive: bool,
    /// What a zero of the radicand means, if anything.
    zero_kind: Option<EndKind>,
}

impl Branch {
    fn new(p: &ProblemSpec) -> Result<Branch, SolveError> {
        debug_assert!(!p.n.is_one());
        let k = p.n.minus_one();
        let overflow = || SolveError::Domain(ExponentError::Overflow);
        let g0 = signed_pow(p.d, k.checked_neg().ok_or_else(overflow)?)?;
        let root = k
            .checked_neg()
            .and_then(Rational::recip)
            .ok_or_else(overflow)?;
        let sigma = if p.n.class() == ExponentClass::OddOverOdd {
            p.d.signum()
        } else {
            1.0
        };
        let needs_positive = p.n.class() == ExponentClass::OddOverEven || root.den() % 2 == 0;
        let zero_kind = if root.num() < 0 {
            Some(EndKind::Asymptote)
        } else if p.n.ratio().is_zero() {
            // linear: y passes through zero harmlessly
            None
        } else {
            Some(EndKind::RootBoundary)
        };
        Ok(Branch {
            k,
            g0,
            root,
            sigma,
            needs_positive,
            zero_kind,
        })
    }

    fn radicand(&self, w: f64) -> f64 {
        self.g0 - self.k.to_f64() * w
    }

    /// Whether `g` has left the branch containing `t = 0`.
    fn crossed(&self, g: f64) -> bool {
        self.zero_kind.is_some() && (g == 0.0 || g.signum() != self.g0.signum())
    }

    fn solution(&self, t: f64, a_int: f64, g: f64) -> Result<f64, SolveError> {
        let outside = SolveError::OutsideValidity { t, radicand: g };
        if (self.needs_positive && g <= 0.0) || (g == 0.0 && self.root.num() < 0) {
            return Err(outside);
        }
        let y = self.sigma * a_int.exp() * signed_pow(g, self.root)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(outside)
        }
    }
}

fn not_for_n_one() -> SolveError {
    SolveError::InvalidProblem("the radicand is not defined for n = 1".into())
}

/// `G(t) = d^{1-n} - (n-1) B(t)`. Undefined for `n = 1`.
pub fn radicand(p: &ProblemSpec, t: f64, cfg: &QuadConfig) -> Result<f64, SolveError> {
    if p.n.is_one() {
        return Err(not_for_n_one());
    }
    p.validate()?;
    let branch = Branch::new(p)?;
    let (_, w) = NestedIntegrator::new(&p.a, &p.b, branch.k.to_f64(), cfg).advance_to(t)?;
    Ok(branch.radicand(w))
}

/// Closed-form `y(t)`.
pub fn eval_solution(p: &ProblemSpec, t: f64, cfg: &QuadConfig) -> Result<f64, SolveError> {
    p.validate()?;
    if p.n.is_one() {
        let exponent = integrate_fn(|s| Ok(p.a.eval(s)? + p.b.eval(s)?), t, cfg)?;
        let y = p.d * exponent.exp();
        return if y.is_finite() {
            Ok(y)
        } else {
            Err(SolveError::Quad(QuadError::NonFinite { t }))
        };
    }
    let branch = Branch::new(p)?;
    let (a_int, w) = NestedIntegrator::new(&p.a, &p.b, branch.k.to_f64(), cfg).advance_to(t)?;
    branch.solution(t, a_int, branch.radicand(w))
}

/// `y` at every point of `ts` (any order), sweeping each side of `t = 0`
/// once. Points past a failure on the same side report the same failure
/// kind as their own evaluation would.
pub fn eval_grid(
    p: &ProblemSpec,
    ts: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<Result<f64, SolveError>>, SolveError> {
    p.validate()?;
    let branch = if p.n.is_one() {
        None
    } else {
        Some(Branch::new(p)?)
    };
    let k = branch.map_or(0.0, |b| b.k.to_f64());
    let mut out: Vec<Result<f64, SolveError>> = vec![Ok(0.0); ts.len()];
    for positive in [true, false] {
        let mut order: Vec<usize> = (0..ts.len())
            .filter(|&i| if positive { ts[i] >= 0.0 } else { ts[i] < 0.0 })
            .collect();
        order.sort_by(|&i, &j| ts[i].abs().total_cmp(&ts[j].abs()));
        let mut sweep = NestedIntegrator::new(&p.a, &p.b, k, cfg);
        let mut broken: Option<SolveError> = None;
        for i in order {
            let t = ts[i];
            if let Some(err) = &broken {
                out[i] = Err(err.clone());
                continue;
            }
            out[i] = match sweep.advance_to(t) {
                Err(e) => {
                    broken = Some(SolveError::Quad(e.clone()));
                    Err(SolveError::Quad(e))
                }
                Ok((a_int, w)) => match &branch {
                    None => {
                        let y = p.d * (a_int + w).exp();
                        if y.is_finite() {
                            Ok(y)
                        } else {
                            Err(SolveError::Quad(QuadError::NonFinite { t }))
                        }
                    }
                    Some(br) => br.solution(t, a_int, br.radicand(w)),
                },
            };
        }
    }
    Ok(out)
}

/// Search knobs for [`validity_interval_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityOptions {
    /// Uniform scan points per side before bisection.
    pub scan_steps: usize,
    pub bisect_tol: f64,
}

impl Default for ValidityOptions {
    fn default() -> Self {
        ValidityOptions {
            scan_steps: 1024,
            bisect_tol: 1e-9,
        }
    }
}

pub fn validity_interval(
    p: &ProblemSpec,
    search_radius: f64,
    cfg: &QuadConfig,
) -> Result<Validity, SolveError> {
    validity_interval_with(p, search_radius, cfg, &ValidityOptions::default())
}

pub fn validity_interval_with(
    p: &ProblemSpec,
    search_radius: f64,
    cfg: &QuadConfig,
    opts: &ValidityOptions,
) -> Result<Validity, SolveError> {
    p.validate()?;
    if !(search_radius > 0.0 && search_radius.is_finite()) {
        return Err(SolveError::InvalidProblem(format!(
            "search radius must be positive, got {search_radius}"
        )));
    }
    if p.n.is_one() {
        return Ok(Validity {
            lo: -search_radius,
            hi: search_radius,
            lo_kind: EndKind::Unbounded,
            hi_kind: EndKind::Unbounded,
        });
    }
    let branch = Branch::new(p)?;
    let (hi, hi_kind) = scan_side(p, &branch, search_radius, cfg, opts)?;
    let (lo, lo_kind) = scan_side(p, &branch, -search_radius, cfg, opts)?;
    Ok(Validity {
        lo,
        hi,
        lo_kind,
        hi_kind,
    })
}

fn scan_side(
    p: &ProblemSpec,
    branch: &Branch,
    reach: f64,
    cfg: &QuadConfig,
    opts: &ValidityOptions,
) -> Result<(f64, EndKind), SolveError> {
    let Some(kind) = branch.zero_kind else {
        return Ok((reach, EndKind::SearchLimit));
    };
    let steps = opts.scan_steps.max(1);
    let mut good = NestedIntegrator::new(&p.a, &p.b, branch.k.to_f64(), cfg);
    for j in 1..=steps {
        let t = reach * j as f64 / steps as f64;
        let mut probe = good.clone();
        let (_, w) = probe.advance_to(t)?;
        if !branch.crossed(branch.radicand(w)) {
            good = probe;
            continue;
        }
        // radicand keeps its sign at good.t() and loses it at bad
        let mut bad = t;
        while (bad - good.t()).abs() > opts.bisect_tol {
            let mid = 0.5 * (good.t() + bad);
            if mid == good.t() || mid == bad {
                break;
            }
            let mut probe = good.clone();
            let (_, w) = probe.advance_to(mid)?;
            if branch.crossed(branch.radicand(w)) {
                bad = mid;
            } else {
                good = probe;
            }
        }
        return Ok((good.t(), kind));
    }
    Ok((reach, EndKind::SearchLimit))
}
