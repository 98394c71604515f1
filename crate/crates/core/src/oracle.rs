//! Direct numerical integration of `y' = a(t) y + b(t) y^n` from `(0, d)`.
//!
//! This is the independent check on the closed form: it never touches the
//! radicand or the quadrature module, only the right-hand side of the ODE.
//! Runs that cannot reach `t_end` stop with a [`Termination`] marker and keep
//! everything integrated so far.

use thiserror::Error;

use crate::closedform::{EndKind, ProblemSpec, SolveError, Validity};
use crate::dopri::{self, Control, Retry, RhsError, Settings, State, Step, Stop};
use crate::exponent::{signed_pow, ExponentError};
use crate::expr::EvalError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    pub blowup_threshold: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_steps: 1_000_000,
            blowup_threshold: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Problem(#[from] SolveError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },
    #[error("solution left the domain of y^n at t = {t}")]
    Domain { t: f64 },
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Reached,
    /// `|y|` exceeded the blow-up threshold, or the step size collapsed
    /// while `|y|` was large.
    BlowUp,
    /// The solution reached `y = 0`, where `y^n` stops being Lipschitz.
    ZeroCrossing,
    /// Every smaller step still left the domain of `y^n`.
    DomainError,
    StepFailure,
    MaxSteps,
}

impl Termination {
    pub fn end_kind(self) -> EndKind {
        match self {
            Termination::Reached | Termination::MaxSteps => EndKind::SearchLimit,
            Termination::BlowUp => EndKind::Asymptote,
            Termination::ZeroCrossing | Termination::DomainError | Termination::StepFailure => {
                EndKind::RootBoundary
            }
        }
    }
}

/// Accepted steps of one run, outward from `t = 0`, with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    d: f64,
    steps: Vec<Step<1>>,
    t_last: f64,
    termination: Termination,
}

impl Trajectory {
    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Last reliable time.
    pub fn t_last(&self) -> f64 {
        self.t_last
    }

    pub fn y_last(&self) -> f64 {
        self.steps.last().map_or(self.d, |s| s.y1[0])
    }

    /// Accepted mesh points, starting with `(0, d)`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        std::iter::once((0.0, self.d))
            .chain(self.steps.iter().map(|s| (s.t1(), s.y1[0])))
            .collect()
    }

    /// Dense-output value at `t`, or `None` outside the integrated range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        if t == 0.0 {
            return Some(self.d);
        }
        let dir = self.t_last.signum();
        if t * dir < 0.0 || t.abs() > self.t_last.abs() {
            return None;
        }
        let idx = self.steps.partition_point(|s| s.t1().abs() < t.abs());
        let step = self.steps.get(idx).or_else(|| self.steps.last())?;
        Some(step.eval(t)[0])
    }
}

#[derive(Debug)]
enum RhsFail {
    Eval(EvalError),
    Domain,
    /// Trial state on the far side of `y = 0` from `d`.
    Zero,
}

fn rhs(p: &ProblemSpec, guard_zero: bool, t: f64, y: f64) -> Result<f64, RhsError<RhsFail>> {
    if guard_zero && (y == 0.0 || y.signum() != p.d.signum()) {
        return Err(RhsError::Retry(RhsFail::Zero));
    }
    let a = p.a.eval(t).map_err(|e| RhsError::Fatal(RhsFail::Eval(e)))?;
    let b = p.b.eval(t).map_err(|e| RhsError::Fatal(RhsFail::Eval(e)))?;
    let power = if p.n.is_one() {
        y
    } else {
        signed_pow(y, p.n.ratio()).map_err(|_: ExponentError| RhsError::Retry(RhsFail::Domain))?
    };
    let dy = a * y + b * power;
    if dy.is_finite() {
        Ok(dy)
    } else {
        Err(RhsError::Retry(RhsFail::Domain))
    }
}

/// Integrate from `(0, d)` toward `t_end`, stopping early (without error) on
/// blow-up, zero crossing, domain exit or step collapse.
pub fn integrate(
    p: &ProblemSpec,
    t_end: f64,
    cfg: &OracleConfig,
) -> Result<Trajectory, OracleError> {
    p.validate()?;
    let settings = Settings {
        rtol: cfg.rel_tol,
        atol: cfg.abs_tol,
        max_steps: cfg.max_steps,
    };
    // y = 0 is an equilibrium for n ≥ 1 and a branch point for the
    // non-integer and negative exponents; only the linear n = 0 crosses it.
    let guard_zero = !p.n.ratio().is_zero();
    let threshold = cfg.blowup_threshold;
    if p.d.abs() > threshold {
        return Ok(Trajectory {
            d: p.d,
            steps: Vec::new(),
            t_last: 0.0,
            termination: Termination::BlowUp,
        });
    }
    let mut steps: Vec<Step<1>> = Vec::new();
    let mut blew_up = false;
    let mut state = State::new(0.0, [p.d]);
    let stop = dopri::integrate(
        &mut state,
        t_end,
        &settings,
        |t, y: &[f64; 1]| Ok([rhs(p, guard_zero, t, y[0])?]),
        |step| {
            steps.push(*step);
            if step.y1[0].abs() > threshold {
                blew_up = true;
                Control::Halt
            } else {
                Control::Continue
            }
        },
    );
    let termination = match stop {
        Stop::Reached => Termination::Reached,
        Stop::Halted if blew_up => Termination::BlowUp,
        Stop::Halted => Termination::StepFailure,
        Stop::MaxSteps => Termination::MaxSteps,
        Stop::Failed(RhsFail::Eval(e)) => return Err(OracleError::Eval(e)),
        Stop::Failed(_) => return Err(OracleError::Domain { t: state.t }),
        Stop::Collapsed { .. } if state.y[0].abs() >= threshold.sqrt() => Termination::BlowUp,
        Stop::Collapsed { last_retry } => match last_retry {
            Some(Retry::Rhs(RhsFail::Zero)) => Termination::ZeroCrossing,
            Some(Retry::Rhs(_)) => Termination::DomainError,
            None => Termination::StepFailure,
        },
    };
    Ok(Trajectory {
        d: p.d,
        steps,
        t_last: state.t,
        termination,
    })
}

/// Like [`integrate`], but a run that ends on a domain exit or a step-size
/// underflow is an error. Blow-up and zero crossing stay markers.
pub fn rk_solve(
    p: &ProblemSpec,
    t_end: f64,
    cfg: &OracleConfig,
) -> Result<Trajectory, OracleError> {
    let traj = integrate(p, t_end, cfg)?;
    match traj.termination {
        Termination::DomainError => Err(OracleError::Domain { t: traj.t_last }),
        Termination::StepFailure | Termination::MaxSteps => {
            Err(OracleError::StepFailure { t: traj.t_last })
        }
        _ => Ok(traj),
    }
}

/// Runs in both directions from `t = 0`.
#[derive(Debug, Clone)]
pub struct Span {
    pub backward: Trajectory,
    pub forward: Trajectory,
}

impl Span {
    pub fn eval(&self, t: f64) -> Option<f64> {
        if t < 0.0 {
            self.backward.eval(t)
        } else {
            self.forward.eval(t)
        }
    }

    /// The reached range, as a validity interval.
    pub fn validity(&self) -> Validity {
        Validity {
            lo: self.backward.t_last,
            hi: self.forward.t_last,
            lo_kind: self.backward.termination.end_kind(),
            hi_kind: self.forward.termination.end_kind(),
        }
    }
}

/// Integrate toward `t_lo < 0` and `t_hi > 0`.
pub fn solve_span(
    p: &ProblemSpec,
    t_lo: f64,
    t_hi: f64,
    cfg: &OracleConfig,
) -> Result<Span, OracleError> {
    let (backward, forward) =
        crate::exec::join(|| integrate(p, t_lo, cfg), || integrate(p, t_hi, cfg));
    Ok(Span {
        backward: backward?,
        forward: forward?,
    })
}
