//! Exact-rational probability intervals.

use std::cmp::{max, min};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

pub type Rational = BigRational;

/// Longest accepted fractional part of a decimal literal.
pub const MAX_FRACTION_DIGITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntervalError {
    #[error("endpoint {0} lies outside [0, 1]")]
    OutOfRange(String),
    #[error("lower endpoint {lo} exceeds upper endpoint {hi}")]
    Inverted { lo: String, hi: String },
    #[error("malformed number `{0}`")]
    BadNumber(String),
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `0.8`, `.8`, `1`, or `4/5` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, IntervalError> {
    let bad = || IntervalError::BadNumber(text.to_string());
    let s = text.trim();
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let all_digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let value = if let Some((num, den)) = digits.split_once('/') {
        let (num, den) = (num.trim(), den.trim());
        if !all_digits(num) || !all_digits(den) {
            return Err(bad());
        }
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Rational::new(num.parse().map_err(|_| bad())?, den)
    } else {
        let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
        if (int.is_empty() && frac.is_empty())
            || !(int.is_empty() || all_digits(int))
            || !(frac.is_empty() || all_digits(frac))
            || frac.len() > MAX_FRACTION_DIGITS
            || digits.ends_with('.') && int.is_empty()
        {
            return Err(bad());
        }
        let numer: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        Rational::new(numer, BigInt::from(10u32).pow(frac.len() as u32))
    };
    Ok(if negative { -value } else { value })
}

/// Always `num/den`, including integers (`1/1`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Nearest `f64` rounded to six significant digits, for display only.
pub fn decimal_approx(r: &Rational) -> f64 {
    let v = r.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().unwrap_or(v)
}

/// A closed subinterval of `[0, 1]`, or the empty set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProbInterval {
    Empty,
    Closed { lo: Rational, hi: Rational },
}

impl ProbInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, IntervalError> {
        for e in [&lo, &hi] {
            if e.is_negative() || *e > Rational::one() {
                return Err(IntervalError::OutOfRange(format_rational(e)));
            }
        }
        if lo > hi {
            return Err(IntervalError::Inverted {
                lo: format_rational(&lo),
                hi: format_rational(&hi),
            });
        }
        Ok(ProbInterval::Closed { lo, hi })
    }

    /// `[0, 1]`: says nothing.
    pub fn unit() -> Self {
        ProbInterval::Closed {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn point(p: Rational) -> Result<Self, IntervalError> {
        Self::new(p.clone(), p)
    }

    /// Shorthand for tests and fixtures: `[a/den, b/den]`. Panics on invalid input.
    pub fn ratio(lo: (i64, i64), hi: (i64, i64)) -> Self {
        Self::new(rational(lo.0, lo.1), rational(hi.0, hi.1)).expect("valid interval")
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ProbInterval::Empty)
    }

    pub fn lo(&self) -> Option<&Rational> {
        match self {
            ProbInterval::Empty => None,
            ProbInterval::Closed { lo, .. } => Some(lo),
        }
    }

    pub fn hi(&self) -> Option<&Rational> {
        match self {
            ProbInterval::Empty => None,
            ProbInterval::Closed { hi, .. } => Some(hi),
        }
    }

    pub fn bounds(&self) -> Option<(&Rational, &Rational)> {
        match self {
            ProbInterval::Empty => None,
            ProbInterval::Closed { lo, hi } => Some((lo, hi)),
        }
    }

    pub fn intersect(&self, other: &ProbInterval) -> ProbInterval {
        match (self.bounds(), other.bounds()) {
            (Some((a_lo, a_hi)), Some((b_lo, b_hi))) => {
                let lo = max(a_lo, b_lo);
                let hi = min(a_hi, b_hi);
                if lo > hi {
                    ProbInterval::Empty
                } else {
                    ProbInterval::Closed {
                        lo: lo.clone(),
                        hi: hi.clone(),
                    }
                }
            }
            _ => ProbInterval::Empty,
        }
    }

    /// Set inclusion: `inner ⊆ self`.
    pub fn contains(&self, inner: &ProbInterval) -> bool {
        match (self.bounds(), inner.bounds()) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some((o_lo, o_hi)), Some((i_lo, i_hi))) => o_lo <= i_lo && i_hi <= o_hi,
        }
    }

    pub fn contains_value(&self, p: &Rational) -> bool {
        self.bounds().is_some_and(|(lo, hi)| lo <= p && p <= hi)
    }

    pub fn width(&self) -> Rational {
        match self.bounds() {
            None => Rational::zero(),
            Some((lo, hi)) => hi - lo,
        }
    }

    /// `[1 - hi, 1 - lo]`.
    pub fn complement(&self) -> ProbInterval {
        match self.bounds() {
            None => ProbInterval::Empty,
            Some((lo, hi)) => ProbInterval::Closed {
                lo: Rational::one() - hi,
                hi: Rational::one() - lo,
            },
        }
    }

    /// JSON form; `None` encodes the empty interval.
    pub fn to_json(&self) -> Option<IntervalJson> {
        self.bounds().map(|(lo, hi)| IntervalJson {
            lo: format_rational(lo),
            hi: format_rational(hi),
            lo_dec: decimal_approx(lo),
            hi_dec: decimal_approx(hi),
        })
    }

    /// `[0.3, 0.8]`-style rendering for human-readable reports.
    pub fn to_decimal_string(&self) -> String {
        match self.bounds() {
            None => "empty".to_string(),
            Some((lo, hi)) => format!("[{}, {}]", decimal_approx(lo), decimal_approx(hi)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalJson {
    pub lo: String,
    pub hi: String,
    pub lo_dec: f64,
    pub hi_dec: f64,
}

impl fmt::Display for ProbInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bounds() {
            None => f.write_str("empty"),
            Some((lo, hi)) => write!(f, "[{}, {}]", format_rational(lo), format_rational(hi)),
        }
    }
}
