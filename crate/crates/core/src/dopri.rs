//! Dormand–Prince 5(4) embedded pair with step-size control and the
//! standard fourth-order continuous extension.
//!
//! Integration runs in either direction; `h` carries the sign of
//! `t_end - t0`.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

/// Failure of a right-hand-side evaluation.
#[derive(Debug, Clone)]
pub(crate) enum RhsError<E> {
    /// The trial state left the legal domain; retry with a smaller step.
    Retry(E),
    /// Not recoverable by shrinking the step.
    Fatal(E),
}

/// Verdict of the step observer on an error-accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Control {
    Continue,
    /// Keep the step and stop.
    Halt,
}

#[derive(Debug, Clone)]
pub(crate) enum Stop<E> {
    Reached,
    Halted,
    /// Step size fell below round-off level. `last_retry` is the most recent
    /// domain rejection, if any.
    Collapsed {
        last_retry: Option<Retry<E>>,
    },
    MaxSteps,
    Failed(E),
}

#[derive(Debug, Clone)]
pub(crate) enum Retry<E> {
    Rhs(E),
}

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at `t` (meant for `t` within the step).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.cont;
        std::array::from_fn(|i| {
            r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])))
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct State<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// Derivative at (t, y), reused as the first stage of the next step.
    f: Option<[f64; N]>,
    /// Suggested magnitude for the next step.
    h: Option<f64>,
}

impl<const N: usize> State<N> {
    pub fn new(t: f64, y: [f64; N]) -> Self {
        State {
            t,
            y,
            f: None,
            h: None,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

fn min_step(t: f64) -> f64 {
    16.0 * f64::EPSILON * t.abs().max(1e-3)
}

/// Advance `state` toward `t_end`, calling `observe` after every
/// error-accepted step. On return `state` holds the last accepted point.
pub(crate) fn integrate<const N: usize, E, F, G>(
    state: &mut State<N>,
    t_end: f64,
    settings: &Settings,
    mut rhs: F,
    mut observe: G,
) -> Stop<E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], RhsError<E>>,
    G: FnMut(&Step<N>) -> Control,
{
    let span = t_end - state.t;
    if span == 0.0 {
        return Stop::Reached;
    }
    let dir = span.signum();

    let k1 = match state.f {
        Some(f) => f,
        None => match rhs(state.t, &state.y) {
            Ok(f) => f,
            Err(RhsError::Retry(e) | RhsError::Fatal(e)) => return Stop::Failed(e),
        },
    };
    state.f = Some(k1);

    let mut h_abs = state.h.unwrap_or_else(|| {
        let (mut d0, mut d1) = (0.0, 0.0);
        for (y, f) in state.y.iter().zip(&k1) {
            let sc = settings.atol + settings.rtol * y.abs();
            d0 += (y / sc).powi(2);
            d1 += (f / sc).powi(2);
        }
        let guess = if d0 < 1e-10 || d1 < 1e-10 {
            1e-6
        } else {
            0.01 * (d0 / d1).sqrt()
        };
        guess.min(0.1 * span.abs()).max(min_step(state.t))
    });

    let mut last_retry: Option<Retry<E>> = None;
    let mut rejected_last = false;
    for _ in 0..settings.max_steps {
        let remaining = t_end - state.t;
        if remaining * dir <= 0.0 {
            return Stop::Reached;
        }
        if h_abs < min_step(state.t) {
            return Stop::Collapsed { last_retry };
        }
        let mut last = false;
        if h_abs >= remaining.abs() {
            h_abs = remaining.abs();
            last = true;
        }
        let h = dir * h_abs;
        let t = state.t;
        let y = state.y;
        let k1 = state.f.expect("derivative cached above");

        let stages = (|| {
            let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = rhs(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y1 = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = rhs(t + h, &y1)?;
            Ok((k3, k4, k5, k6, k7, y1))
        })();

        let (k3, k4, k5, k6, k7, y1) = match stages {
            Ok(s) => s,
            Err(RhsError::Fatal(e)) => return Stop::Failed(e),
            Err(RhsError::Retry(e)) => {
                last_retry = Some(Retry::Rhs(e));
                h_abs *= 0.25;
                rejected_last = true;
                continue;
            }
        };

        let mut err_sq = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = settings.atol + settings.rtol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();
        if !err.is_finite() {
            h_abs *= 0.2;
            rejected_last = true;
            continue;
        }
        if err > 1.0 {
            h_abs *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            rejected_last = true;
            continue;
        }

        let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
        let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
        let cont = [
            y,
            ydiff,
            bspl,
            std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
            std::array::from_fn(|i| {
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            }),
        ];
        let step = Step { t0: t, h, y1, cont };
        let verdict = observe(&step);
        state.t = if last { t_end } else { t + h };
        state.y = y1;
        state.f = Some(k7);
        let grow = if err == 0.0 {
            10.0
        } else {
            0.9 * err.powf(-0.2)
        };
        let fac = if rejected_last {
            grow.clamp(0.2, 1.0)
        } else {
            grow.clamp(0.2, 10.0)
        };
        rejected_last = false;
        h_abs *= fac;
        state.h = Some(h_abs);
        if verdict == Control::Halt {
            return Stop::Halted;
        }
        if last {
            return Stop::Reached;
        }
    }
    Stop::MaxSteps
}
