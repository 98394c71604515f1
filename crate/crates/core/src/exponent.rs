//! Exact rational exponents and sign-correct real powers.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("exponent overflow")]
    Overflow,
    #[error("cannot parse exponent `{0}`: expected `p/q` or an integer")]
    Parse(String),
    #[error("{base}^({num}/{den}) is not a real number")]
    Domain { base: f64, num: i64, den: i64 },
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Reduced fraction `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Rational, ExponentError> {
        if den == 0 {
            return Err(ExponentError::ZeroDenominator);
        }
        let g = gcd(num, den).max(1);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = num.checked_neg().ok_or(ExponentError::Overflow)?;
            den = den.checked_neg().ok_or(ExponentError::Overflow)?;
        }
        Ok(Rational { num, den })
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn checked_neg(self) -> Option<Rational> {
        Some(Rational {
            num: self.num.checked_neg()?,
            den: self.den,
        })
    }

    pub fn checked_sub(self, rhs: Rational) -> Option<Rational> {
        let num = self
            .num
            .checked_mul(rhs.den)?
            .checked_sub(rhs.num.checked_mul(self.den)?)?;
        let den = self.den.checked_mul(rhs.den)?;
        Rational::new(num, den).ok()
    }

    /// `1 / self`; `None` for zero.
    pub fn recip(self) -> Option<Rational> {
        if self.num == 0 {
            None
        } else {
            Rational::new(self.den, self.num).ok()
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Parity class of a reduced exponent `p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentClass {
    EvenOverOdd,
    OddOverEven,
    OddOverOdd,
    One,
}

impl ExponentClass {
    pub fn name(self) -> &'static str {
        match self {
            ExponentClass::EvenOverOdd => "even/odd",
            ExponentClass::OddOverEven => "odd/even",
            ExponentClass::OddOverOdd => "odd/odd",
            ExponentClass::One => "one",
        }
    }
}

/// The Bernoulli exponent `n = p/q`, reduced, with its parity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalExponent {
    ratio: Rational,
    class: ExponentClass,
}

impl RationalExponent {
    pub fn p(&self) -> i64 {
        self.ratio.num
    }

    pub fn q(&self) -> i64 {
        self.ratio.den
    }

    pub fn class(&self) -> ExponentClass {
        self.class
    }

    pub fn ratio(&self) -> Rational {
        self.ratio
    }

    pub fn to_f64(&self) -> f64 {
        self.ratio.to_f64()
    }

    pub fn is_one(&self) -> bool {
        self.class == ExponentClass::One
    }

    /// `n - 1` as an exact fraction.
    pub fn minus_one(&self) -> Rational {
        // p - q cannot overflow for exponents built from i64 pairs of sane size;
        // fall back to checked arithmetic anyway.
        self.ratio
            .checked_sub(Rational::integer(1))
            .expect("exponent too large")
    }
}

impl fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ratio.fmt(f)
    }
}

impl FromStr for RationalExponent {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExponentError::Parse(s.to_string());
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: i64 = p.parse().map_err(|_| bad())?;
        let q: i64 = q.parse().map_err(|_| bad())?;
        classify_exponent(p, q)
    }
}

pub fn classify_exponent(p: i64, q: i64) -> Result<RationalExponent, ExponentError> {
    let ratio = Rational::new(p, q)?;
    let class = match (ratio.num.rem_euclid(2) == 0, ratio.den % 2 == 0) {
        _ if ratio.num == 1 && ratio.den == 1 => ExponentClass::One,
        (true, false) => ExponentClass::EvenOverOdd,
        (false, true) => ExponentClass::OddOverEven,
        (false, false) => ExponentClass::OddOverOdd,
        (true, true) => unreachable!("reduced fraction with both parts even"),
    };
    Ok(RationalExponent { ratio, class })
}

/// Real power `x^(r)` with odd-root semantics: for odd `r.den()` the result is
/// `sign(x)^num * |x|^r`; for even `r.den()` the base must be non-negative.
pub fn signed_pow(x: f64, r: Rational) -> Result<f64, ExponentError> {
    let (num, den) = (r.num, r.den);
    let domain = || ExponentError::Domain { base: x, num, den };
    if den % 2 == 0 && x < 0.0 {
        return Err(domain());
    }
    if x == 0.0 {
        return match num.signum() {
            -1 => Err(domain()),
            0 => Ok(1.0),
            _ => Ok(0.0),
        };
    }
    let sign = if x < 0.0 && num % 2 != 0 { -1.0 } else { 1.0 };
    let mag = x.abs();
    let value = if mag == 1.0 {
        1.0
    } else if den == 1 && num.unsigned_abs() <= i32::MAX as u64 {
        mag.powi(num as i32)
    } else {
        mag.powf(r.to_f64())
    };
    Ok(sign * value)
}
