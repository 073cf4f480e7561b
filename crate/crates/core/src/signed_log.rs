//! Signed logarithmic number system (LNS) arithmetic.
//!
//! A real `v` is carried as a sign, the natural log of `|v|` and an explicit
//! zero flag. Multiplication becomes addition of log-magnitudes with a sign
//! XOR; addition becomes the Jacobian logarithm `max*` for like signs and the
//! log-domain difference for unlike signs.
//!
//! The signed-difference rule (`max*_-`) is the standard log-domain
//! subtraction `max(La, Lb) + ln(1 - e^-|La - Lb|)`. It is an interpretation:
//! only the combined `max*_±` operator is named in the node taxonomy this
//! crate follows.

use std::fmt;

use crate::error::DomainError;

/// Identity element of [`max_star`]. Only used at the `max*` level, never
/// inside [`SignedLogValue`].
pub const NEG_SENTINEL: f64 = f64::NEG_INFINITY;

/// Sign of an LNS value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn of(v: f64) -> Self {
        if v.is_sign_negative() && v != 0.0 {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    /// Sign product, i.e. XOR of the sign bits.
    pub fn xor(self, other: Sign) -> Sign {
        if self == other {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }
}

/// A real number as `(sign, ln|v|, is_zero)`.
///
/// Zero is canonical: `sign = Pos`, `log_mag = f64::MIN`. Arithmetic never
/// reads the sign or magnitude of a zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue {
    sign: Sign,
    log_mag: f64,
    is_zero: bool,
}

impl SignedLogValue {
    pub const ZERO: SignedLogValue = SignedLogValue {
        sign: Sign::Pos,
        log_mag: f64::MIN,
        is_zero: true,
    };

    pub const ONE: SignedLogValue = SignedLogValue {
        sign: Sign::Pos,
        log_mag: 0.0,
        is_zero: false,
    };

    /// Builds a non-zero value directly from its log-domain parts.
    pub fn from_parts(sign: Sign, log_mag: f64) -> Result<Self, DomainError> {
        if !log_mag.is_finite() {
            return Err(DomainError::NonFinite(log_mag));
        }
        Ok(SignedLogValue {
            sign,
            log_mag,
            is_zero: false,
        })
    }

    pub fn from_linear(v: f64) -> Result<Self, DomainError> {
        if !v.is_finite() {
            return Err(DomainError::NonFinite(v));
        }
        if v == 0.0 {
            return Ok(Self::ZERO);
        }
        Ok(SignedLogValue {
            sign: Sign::of(v),
            log_mag: v.abs().ln(),
            is_zero: false,
        })
    }

    pub fn to_linear(self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.sign.as_f64() * self.log_mag.exp()
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

impl fmt::Display for SignedLogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero {
            write!(f, "lns(0)")
        } else {
            let s = if self.sign == Sign::Pos { '+' } else { '-' };
            write!(f, "lns({s}e^{})", self.log_mag)
        }
    }
}

/// LNS product: sign XOR, log-magnitude sum.
pub fn lns_mul(a: SignedLogValue, b: SignedLogValue) -> SignedLogValue {
    if a.is_zero || b.is_zero {
        return SignedLogValue::ZERO;
    }
    SignedLogValue {
        sign: a.sign.xor(b.sign),
        log_mag: a.log_mag + b.log_mag,
        is_zero: false,
    }
}

/// LNS sum. Exact cancellation (opposite signs, bitwise-equal magnitudes)
/// yields the canonical zero.
pub fn lns_add(a: SignedLogValue, b: SignedLogValue) -> SignedLogValue {
    if a.is_zero {
        return b;
    }
    if b.is_zero {
        return a;
    }
    if a.sign == b.sign {
        return SignedLogValue {
            sign: a.sign,
            log_mag: max_star(a.log_mag, b.log_mag),
            is_zero: false,
        };
    }
    if a.log_mag == b.log_mag {
        return SignedLogValue::ZERO;
    }
    let (big, small) = if a.log_mag > b.log_mag {
        (a, b)
    } else {
        (b, a)
    };
    SignedLogValue {
        sign: big.sign,
        log_mag: big.log_mag + log1mexp(big.log_mag - small.log_mag),
        is_zero: false,
    }
}

/// `ln(1 - e^-d)` for `d > 0`.
///
/// Below `ln 2` the `expm1` branch keeps full relative precision; above it
/// `ln_1p` does.
fn log1mexp(d: f64) -> f64 {
    if d < std::f64::consts::LN_2 {
        (-(-d).exp_m1()).ln()
    } else {
        (-(-d).exp()).ln_1p()
    }
}

/// Jacobian logarithm `ln(e^x + e^y)` in the overflow-free form
/// `max(x, y) + ln(1 + e^-|x - y|)`.
pub fn max_star(x: f64, y: f64) -> f64 {
    let hi = x.max(y);
    if hi == NEG_SENTINEL {
        return NEG_SENTINEL;
    }
    let lo = x.min(y);
    if lo == NEG_SENTINEL {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Left fold of [`max_star`], i.e. `ln(sum_i e^{x_i})`.
pub fn max_star_n(xs: &[f64]) -> Result<f64, DomainError> {
    let (first, rest) = xs.split_first().ok_or(DomainError::Empty)?;
    Ok(rest.iter().fold(*first, |acc, &x| max_star(acc, x)))
}
