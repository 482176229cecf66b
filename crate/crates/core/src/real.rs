//! Scalar abstraction for the billiard dynamics.
//!
//! The simulator runs on `f64`. The same code can be instantiated with the
//! 256-bit [`f256`] type, or with the ~474-bit double-word [`Wide`] built on
//! it, when a trajectory has to be followed far beyond the horizon where
//! round-off, amplified by the dispersing scatterers (roughly a factor 5 per
//! collision at r = 0.4), destroys it. Time-reversal checks over a hundred
//! collisions need the latter.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

pub use f256::f256;

pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Send
    + Sync
{
    /// Outward offset applied to a post-collision position.
    const PUSH: f64;
    /// Whether flights pre-screen candidate scatterers in `f64` before the
    /// exact test (worthwhile only for slow software types).
    const SCREEN: bool = false;

    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn floor(self) -> Self;
    fn abs(self) -> Self;
    /// Integer value of an already-floored number.
    fn to_i64(self) -> i64;
    fn infinity() -> Self;

    #[inline]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    #[inline]
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    #[inline]
    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const PUSH: f64 = 1e-12;

    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline(always)]
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline(always)]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline(always)]
    fn floor(self) -> Self {
        f64::floor(self)
    }
    #[inline(always)]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline(always)]
    fn to_i64(self) -> i64 {
        self as i64
    }
    #[inline(always)]
    fn infinity() -> Self {
        f64::INFINITY
    }
}

impl Real for f256 {
    const SCREEN: bool = true;
    // A push of any representable size would be amplified past the retrace
    // tolerance within a hundred collisions; the departure root is discarded
    // by the exit threshold instead.
    const PUSH: f64 = 0.0;

    fn from_f64(x: f64) -> Self {
        f256::from(x)
    }
    fn from_i64(x: i64) -> Self {
        f256::from(x)
    }
    fn to_f64(self) -> f64 {
        // 1 sign bit, 19 exponent bits (bias 262143), 236 fraction bits.
        let (hi, _) = self.to_bits();
        let negative = hi >> 127 == 1;
        let exponent = ((hi >> 108) & 0x7_FFFF) as i64;
        let value = if exponent == 0 {
            0.0
        } else if exponent == 0x7_FFFF {
            if (hi & ((1u128 << 108) - 1)) != 0 {
                f64::NAN
            } else {
                f64::INFINITY
            }
        } else {
            let fraction = ((hi >> 56) & ((1u128 << 52) - 1)) as u64;
            let unbiased = exponent - 262_143;
            if unbiased > 1023 {
                f64::INFINITY
            } else if unbiased < -1022 {
                0.0
            } else {
                f64::from_bits(((unbiased + 1023) as u64) << 52 | fraction)
            }
        };
        if negative {
            -value
        } else {
            value
        }
    }
    fn sqrt(self) -> Self {
        f256::sqrt(self)
    }
    fn floor(self) -> Self {
        f256::floor(&self)
    }
    fn abs(self) -> Self {
        f256::abs(&self)
    }
    fn to_i64(self) -> i64 {
        i64::try_from(&self).expect("lattice cell index out of i64 range")
    }
    fn infinity() -> Self {
        f256::INFINITY
    }
}

/// Unevaluated sum `hi + lo` of two `f256` with `|lo| <= ulp(hi) / 2`.
///
/// Arithmetic uses the classic error-free transformations (two-sum,
/// fma-based two-product), giving about 140 significant decimal digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct Wide {
    hi: f256,
    lo: f256,
}

#[inline]
fn two_sum(a: f256, b: f256) -> (f256, f256) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum(a: f256, b: f256) -> (f256, f256) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f256, b: f256) -> (f256, f256) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Wide {
    pub fn new(hi: f256, lo: f256) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Wide { hi, lo }
    }

    pub fn hi(&self) -> f256 {
        self.hi
    }

    #[inline]
    fn normalized(hi: f256, lo: f256) -> Self {
        if !hi.is_finite() {
            return Wide { hi, lo: f256::ZERO };
        }
        let (hi, lo) = fast_two_sum(hi, lo);
        Wide { hi, lo }
    }

    fn mul_f256(self, b: f256) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Wide::normalized(p, self.lo.mul_add(b, e))
    }
}

impl PartialEq for Wide {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Wide {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal if self.hi.is_finite() => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Add for Wide {
    type Output = Wide;
    fn add(self, y: Wide) -> Wide {
        let (sh, sl) = two_sum(self.hi, y.hi);
        if !sh.is_finite() {
            return Wide { hi: sh, lo: f256::ZERO };
        }
        let (th, tl) = two_sum(self.lo, y.lo);
        let (sh, sl) = fast_two_sum(sh, sl + th);
        Wide::normalized(sh, sl + tl)
    }
}

impl Neg for Wide {
    type Output = Wide;
    fn neg(self) -> Wide {
        Wide { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Wide {
    type Output = Wide;
    fn sub(self, y: Wide) -> Wide {
        self + (-y)
    }
}

impl AddAssign for Wide {
    fn add_assign(&mut self, y: Wide) {
        *self = *self + y;
    }
}

impl Mul for Wide {
    type Output = Wide;
    fn mul(self, y: Wide) -> Wide {
        let (ch, cl1) = two_prod(self.hi, y.hi);
        if !ch.is_finite() {
            return Wide { hi: ch, lo: f256::ZERO };
        }
        let tl = self.hi * y.lo;
        let cl2 = self.lo.mul_add(y.hi, tl);
        Wide::normalized(ch, cl1 + cl2)
    }
}

impl Div for Wide {
    type Output = Wide;
    fn div(self, y: Wide) -> Wide {
        let q1 = self.hi / y.hi;
        if !q1.is_finite() {
            return Wide { hi: q1, lo: f256::ZERO };
        }
        let r = self - y.mul_f256(q1);
        let q2 = r.hi / y.hi;
        let r = r - y.mul_f256(q2);
        let q3 = r.hi / y.hi;
        let (h, l) = fast_two_sum(q1, q2);
        Wide::normalized(h, l + q3)
    }
}

impl Real for Wide {
    const PUSH: f64 = 0.0;
    const SCREEN: bool = true;

    fn from_f64(x: f64) -> Self {
        Wide { hi: f256::from(x), lo: f256::ZERO }
    }
    fn from_i64(x: i64) -> Self {
        Wide { hi: f256::from(x), lo: f256::ZERO }
    }
    fn to_f64(self) -> f64 {
        self.hi.to_f64() + self.lo.to_f64()
    }
    fn sqrt(self) -> Self {
        if self.hi <= f256::ZERO {
            return Wide { hi: self.hi.sqrt(), lo: f256::ZERO };
        }
        // One Newton step from the f256 root doubles the precision.
        let s = self.hi.sqrt();
        let (p, e) = two_prod(s, s);
        let residual = (self - Wide { hi: p, lo: e }).hi;
        let correction = residual / (s + s);
        Wide::normalized(s, correction)
    }
    fn floor(self) -> Self {
        let fh = self.hi.floor();
        if fh == self.hi {
            Wide::normalized(fh, self.lo.floor())
        } else {
            Wide { hi: fh, lo: f256::ZERO }
        }
    }
    fn abs(self) -> Self {
        if self.hi < f256::ZERO {
            -self
        } else {
            self
        }
    }
    fn to_i64(self) -> i64 {
        self.hi.to_i64() + self.lo.to_i64()
    }
    fn infinity() -> Self {
        Wide { hi: f256::INFINITY, lo: f256::ZERO }
    }
}
