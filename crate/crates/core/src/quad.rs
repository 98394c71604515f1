//! The integrals behind the closed form:
//!
//! * `A(t) = ∫₀ᵗ a(s) ds` by adaptive Gauss–Kronrod quadrature, and
//! * `W_k(t) = ∫₀ᵗ b(s) e^{k A(s)} ds`, obtained by integrating the coupled
//!   system `A' = a`, `W' = b e^{kA}` from `A(0) = W(0) = 0`.
//!
//! `integral_b` is `W_k` with `k = n - 1`. Negative `t` follows the
//! reversed-limit convention `∫₀ᵗ = -∫ₜ⁰`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dopri::{self, Control, RhsError, Settings, State, Stop};
use crate::exponent::RationalExponent;
use crate::expr::{detect_parity, EvalError, Expr, Parity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_depth: 40,
        }
    }
}

impl QuadConfig {
    fn ode_settings(&self) -> Settings {
        Settings {
            rtol: self.rel_tol,
            atol: self.abs_tol,
            max_steps: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge near t = {t}")]
    NoConvergence { t: f64 },
    #[error("integrand overflowed near t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("identity {identity} requires a {need_a} and b {need_b}, got a {got_a} and b {got_b}")]
    ParityViolation {
        identity: Identity,
        need_a: Parity,
        need_b: Parity,
        got_a: Parity,
        got_b: Parity,
    },
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64), QuadError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

fn adaptive<F>(f: &F, lo: f64, hi: f64, tol: f64, depth: u32) -> Result<f64, QuadError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let (estimate, err) = gk15(f, lo, hi)?;
    if err <= tol {
        return Ok(estimate);
    }
    if depth == 0 {
        return Err(QuadError::NoConvergence { t: 0.5 * (lo + hi) });
    }
    let mid = 0.5 * (lo + hi);
    Ok(adaptive(f, lo, mid, 0.5 * tol, depth - 1)? + adaptive(f, mid, hi, 0.5 * tol, depth - 1)?)
}

/// `∫₀ᵗ f(s) ds` for an arbitrary scalar integrand.
pub fn integrate_fn<F>(f: F, t: f64, cfg: &QuadConfig) -> Result<f64, QuadError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    if t == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if t > 0.0 {
        (0.0, t, 1.0)
    } else {
        (t, 0.0, -1.0)
    };
    let (rough, _) = gk15(&f, lo, hi)?;
    let tol = cfg.abs_tol.max(cfg.rel_tol * rough.abs());
    Ok(sign * adaptive(&f, lo, hi, tol, cfg.max_depth)?)
}

/// `A(t) = ∫₀ᵗ a(s) ds`.
pub fn integral_a(a: &Expr, t: f64, cfg: &QuadConfig) -> Result<f64, QuadError> {
    integrate_fn(|s| a.eval(s), t, cfg)
}

/// Incremental evaluator of `(A(t), W_k(t))` that keeps its integration
/// state between calls, so sweeping a grid outward from 0 costs one pass.
#[derive(Debug, Clone)]
pub struct NestedIntegrator<'e> {
    a: &'e Expr,
    b: &'e Expr,
    k: f64,
    settings: Settings,
    state: State<2>,
}

impl<'e> NestedIntegrator<'e> {
    pub fn new(a: &'e Expr, b: &'e Expr, k: f64, cfg: &QuadConfig) -> Self {
        NestedIntegrator {
            a,
            b,
            k,
            settings: cfg.ode_settings(),
            state: State::new(0.0, [0.0, 0.0]),
        }
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }

    /// `(A, W)` at the current position.
    pub fn current(&self) -> (f64, f64) {
        (self.state.y[0], self.state.y[1])
    }

    pub fn advance_to(&mut self, t: f64) -> Result<(f64, f64), QuadError> {
        let (a, b, k) = (self.a, self.b, self.k);
        let stop = dopri::integrate(
            &mut self.state,
            t,
            &self.settings,
            |s, y: &[f64; 2]| {
                let av = a.eval(s).map_err(|e| RhsError::Fatal(QuadError::Eval(e)))?;
                let bv = b.eval(s).map_err(|e| RhsError::Fatal(QuadError::Eval(e)))?;
                let w = bv * (k * y[0]).exp();
                if w.is_finite() {
                    Ok([av, w])
                } else {
                    Err(RhsError::Fatal(QuadError::NonFinite { t: s }))
                }
            },
            |_| Control::Continue,
        );
        match stop {
            Stop::Reached => Ok(self.current()),
            Stop::Failed(e) => Err(e),
            Stop::Halted | Stop::Collapsed { .. } | Stop::MaxSteps => {
                Err(QuadError::NoConvergence { t: self.state.t })
            }
        }
    }
}

/// `W_k(t) = ∫₀ᵗ b(s) e^{k A(s)} ds`.
pub fn weighted_integral(
    a: &Expr,
    b: &Expr,
    k: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64, QuadError> {
    Ok(NestedIntegrator::new(a, b, k, cfg).advance_to(t)?.1)
}

/// `B(t) = ∫₀ᵗ b(s) e^{(n-1) A(s)} ds`.
pub fn integral_b(
    a: &Expr,
    b: &Expr,
    n: &RationalExponent,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64, QuadError> {
    weighted_integral(a, b, n.minus_one().to_f64(), t, cfg)
}

/// Reflection identities between the weighted integrals, with `k = n - 1`
/// and `W_k` as in [`weighted_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    /// a even, b odd: `∫₋ₜ⁰ b e^{-kA} = -∫₀ᵗ b e^{kA}`.
    Eq4,
    /// a odd, b even: `∫₋ₜ⁰ b e^{kA} = ∫₀ᵗ b e^{kA}`.
    Eq7,
    /// a even, b even: `∫₋ₜ⁰ b e^{kA} = ∫₀ᵗ b e^{-kA}`.
    Eq8,
    /// a even, b even: `∫₋ₜ⁰ b e^{-kA} = ∫₀ᵗ b e^{kA}`.
    Eq9,
}

impl Identity {
    pub const ALL: [Identity; 4] = [Identity::Eq4, Identity::Eq7, Identity::Eq8, Identity::Eq9];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Eq4 => "Eq4",
            Identity::Eq7 => "Eq7",
            Identity::Eq8 => "Eq8",
            Identity::Eq9 => "Eq9",
        }
    }

    /// Required parities of `(a, b)`.
    pub fn requires(self) -> (Parity, Parity) {
        match self {
            Identity::Eq4 => (Parity::Even, Parity::Odd),
            Identity::Eq7 => (Parity::Odd, Parity::Even),
            Identity::Eq8 | Identity::Eq9 => (Parity::Even, Parity::Even),
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identity::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown identity `{s}`"))
    }
}

/// Both sides of an identity at one `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySides {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentitySides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Evaluates both sides without checking parity preconditions.
pub fn identity_sides(
    id: Identity,
    a: &Expr,
    b: &Expr,
    n: &RationalExponent,
    t: f64,
    cfg: &QuadConfig,
) -> Result<IdentitySides, QuadError> {
    let k = n.minus_one().to_f64();
    // ∫₋ₜ⁰ g = -∫₀^{-t} g
    let w = |k: f64, t: f64| weighted_integral(a, b, k, t, cfg);
    let (lhs, rhs) = match id {
        Identity::Eq4 => (-w(-k, -t)?, -w(k, t)?),
        Identity::Eq7 => (-w(k, -t)?, w(k, t)?),
        Identity::Eq8 => (-w(k, -t)?, w(-k, t)?),
        Identity::Eq9 => (-w(-k, -t)?, w(k, t)?),
    };
    Ok(IdentitySides { lhs, rhs })
}

/// `|LHS - RHS|` of the identity after checking the parity preconditions.
pub fn check_identity(
    id: Identity,
    a: &Expr,
    b: &Expr,
    n: &RationalExponent,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64, QuadError> {
    let (need_a, need_b) = id.requires();
    let (got_a, got_b) = (detect_parity(a)?, detect_parity(b)?);
    if got_a != need_a || got_b != need_b {
        return Err(QuadError::ParityViolation {
            identity: id,
            need_a,
            need_b,
            got_a,
            got_b,
        });
    }
    Ok(identity_sides(id, a, b, n, t, cfg)?.residual())
}
