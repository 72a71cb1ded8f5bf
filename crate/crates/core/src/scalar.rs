//! Scalar kinds used by the series engine: plain `f64` and the overflow-safe
//! [`SignedLog`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by the truncated-series routines.
pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn is_zero(&self) -> bool;

    /// `self · e^{log_factor}` without forming `e^{log_factor}` when the
    /// scalar kind can avoid it.
    fn scale_exp(self, log_factor: f64) -> Self;

    /// Sum with a flag for catastrophic cancellation, where the scalar kind
    /// can detect it.
    fn add_flagged(self, other: Self) -> (Self, bool) {
        (self + other, false)
    }

    /// `[0!, 1!, …, n!]`, built by repeated multiplication in this scalar kind.
    fn factorials(n: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = Self::one();
        out.push(acc);
        for k in 1..=n {
            acc = acc * Self::from_f64(k as f64);
            out.push(acc);
        }
        out
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn scale_exp(self, log_factor: f64) -> Self {
        if self == 0.0 {
            0.0
        } else {
            self * log_factor.exp()
        }
    }
    fn add_flagged(self, other: Self) -> (Self, bool) {
        let sum = self + other;
        let scale = self.abs().max(other.abs());
        (sum, sum.abs() * CANCELLATION_LIMIT < scale)
    }
}

/// Error-free transformation `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Relative cancellation beyond which an opposite-sign addition is flagged.
pub const CANCELLATION_LIMIT: f64 = 1e12;

/// A real number stored as a sign and the natural logarithm of its magnitude.
///
/// The logarithm is carried as an unevaluated sum `hi + lo` so that values of
/// size `Γ(300)` keep full relative precision; [`SignedLog::logmag`] returns the
/// rounded sum.
#[derive(Clone, Copy)]
pub struct SignedLog {
    sign: i8,
    hi: f64,
    lo: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        hi: f64::NEG_INFINITY,
        lo: 0.0,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        hi: 0.0,
        lo: 0.0,
    };

    /// Builds a value from a sign in `{-1, 0, 1}` and a log-magnitude.
    pub fn new(sign: i8, logmag: f64) -> Self {
        match sign.signum() {
            0 => Self::ZERO,
            s => Self {
                sign: s,
                hi: logmag,
                lo: 0.0,
            },
        }
    }

    fn from_parts(sign: i8, hi: f64, lo: f64) -> Self {
        if sign == 0 || hi == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        if !hi.is_finite() {
            return Self { sign, hi, lo: 0.0 };
        }
        let (h, l) = two_sum(hi, lo);
        Self { sign, hi: h, lo: l }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 || x.is_nan() {
            return Self::ZERO;
        }
        let sign = if x > 0.0 { 1 } else { -1 };
        let m = x.abs();
        let hi = m.ln();
        let e = hi.exp();
        let lo = if e.is_finite() && e > f64::MIN_POSITIVE {
            (m - e) / e
        } else {
            0.0
        };
        Self::from_parts(sign, hi, lo)
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let e = self.hi.exp();
        let m = if e.is_finite() { e + e * self.lo } else { e };
        f64::from(self.sign) * m
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn logmag(&self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.hi + self.lo
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self {
            sign: self.sign.abs(),
            ..self
        }
    }

    /// `self · e^{l}`.
    pub fn scale_exp(self, l: f64) -> Self {
        if self.sign == 0 {
            return self;
        }
        let (h, e) = two_sum(self.hi, l);
        Self::from_parts(self.sign, h, e + self.lo)
    }

    /// `sign · exp(logmag − l)` evaluated without forming the magnitude.
    pub fn to_f64_scaled(self, l: f64) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let (h, e) = two_sum(self.hi, -l);
        let x = h.exp();
        f64::from(self.sign) * (x + x * (e + self.lo))
    }

    fn cmp_mag(&self, other: &Self) -> Ordering {
        match (self.sign == 0, other.sign == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => (self.hi, self.lo)
                .partial_cmp(&(other.hi, other.lo))
                .unwrap_or(Ordering::Equal),
        }
    }

    /// Sum together with a flag that is set when opposite-sign cancellation
    /// loses more than a factor [`CANCELLATION_LIMIT`] of relative precision.
    pub fn add_checked(self, other: Self) -> (Self, bool) {
        if self.sign == 0 {
            return (other, false);
        }
        if other.sign == 0 {
            return (self, false);
        }
        let (big, small) = if self.cmp_mag(&other) == Ordering::Less {
            (other, self)
        } else {
            (self, other)
        };
        if !big.hi.is_finite() {
            return (big, false);
        }
        let (dh, de) = two_sum(small.hi, -big.hi);
        let d = dh + (de + (small.lo - big.lo));
        if big.sign == small.sign {
            let t = d.exp().ln_1p();
            (Self::from_parts(big.sign, big.hi, big.lo + t), false)
        } else {
            let keep = -d.exp_m1();
            if keep <= 0.0 {
                return (Self::ZERO, true);
            }
            let t = keep.ln();
            let flagged = keep * CANCELLATION_LIMIT < 1.0;
            (Self::from_parts(big.sign, big.hi, big.lo + t), flagged)
        }
    }
}

impl Default for SignedLog {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "SignedLog(0)"),
            s => write!(f, "SignedLog({}exp({}))", if s > 0 { "+" } else { "-" }, self.logmag()),
        }
    }
}

impl PartialEq for SignedLog {
    fn eq(&self, other: &Self) -> bool {
        if self.sign == 0 || other.sign == 0 {
            return self.sign == other.sign;
        }
        self.sign == other.sign && self.hi == other.hi && self.lo == other.lo
    }
}

impl Add for SignedLog {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_checked(rhs).0
    }
}

impl Sub for SignedLog {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.add_checked(-rhs).0
    }
}

impl Neg for SignedLog {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            sign: -self.sign,
            ..self
        }
    }
}

impl Mul for SignedLog {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        let (h, e) = two_sum(self.hi, rhs.hi);
        Self::from_parts(self.sign * rhs.sign, h, e + self.lo + rhs.lo)
    }
}

impl Div for SignedLog {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return Self::ZERO;
        }
        if rhs.sign == 0 {
            return Self {
                sign: self.sign,
                hi: f64::INFINITY,
                lo: 0.0,
            };
        }
        let (h, e) = two_sum(self.hi, -rhs.hi);
        Self::from_parts(self.sign * rhs.sign, h, e + self.lo - rhs.lo)
    }
}

impl Scalar for SignedLog {
    fn zero() -> Self {
        Self::ZERO
    }
    fn one() -> Self {
        Self::ONE
    }
    fn from_f64(x: f64) -> Self {
        SignedLog::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        SignedLog::to_f64(self)
    }
    fn is_zero(&self) -> bool {
        self.sign == 0
    }
    fn scale_exp(self, log_factor: f64) -> Self {
        SignedLog::scale_exp(self, log_factor)
    }
    fn add_flagged(self, other: Self) -> (Self, bool) {
        self.add_checked(other)
    }
}
