//! Exact dyadic rational arithmetic for knot locations.
//!
//! Every knot in this crate is a number of the form `numerator / 2^scale`.
//! Shifts live on the half-integer grid, dilations are powers of two, so
//! closing knot arithmetic over dyadic rationals keeps it exact; only the
//! polynomial coefficients carry floating-point round-off.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// A rational number `numerator / 2^scale` in canonical form
/// (numerator odd, or scale zero).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(from = "(i64, u32)", into = "(i64, u32)")]
pub struct DyadicRational {
    numerator: i64,
    scale: u32,
}

impl DyadicRational {
    /// Build `numerator / 2^scale`, reducing to canonical form.
    pub fn new(numerator: i64, scale: u32) -> Self {
        let mut n = numerator;
        let mut s = scale;
        while s > 0 && n % 2 == 0 {
            n /= 2;
            s -= 1;
        }
        DyadicRational {
            numerator: n,
            scale: s,
        }
    }

    pub fn integer(k: i64) -> Self {
        DyadicRational {
            numerator: k,
            scale: 0,
        }
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    /// `k / 2` in canonical form.
    pub fn half(k: i64) -> Self {
        Self::new(k, 1)
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / (self.scale as f64).exp2()
    }

    pub fn is_integer(&self) -> bool {
        self.scale == 0
    }

    pub fn as_integer(&self) -> Option<i64> {
        (self.scale == 0).then_some(self.numerator)
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    /// Multiply by `2^e` (negative `e` divides).
    pub fn mul_pow2(&self, e: i32) -> Self {
        if e >= 0 {
            let e = e as u32;
            if self.scale >= e {
                Self::new(self.numerator, self.scale - e)
            } else {
                Self::from_i128((self.numerator as i128) << (e - self.scale), 0)
            }
        } else {
            Self::new(self.numerator, self.scale + (-e) as u32)
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        let n = (self.numerator as i128) * (k as i128);
        Self::from_i128(n, self.scale)
    }

    fn from_i128(numerator: i128, scale: u32) -> Self {
        let mut n = numerator;
        let mut s = scale;
        while s > 0 && n % 2 == 0 {
            n /= 2;
            s -= 1;
        }
        assert!(
            n >= i64::MIN as i128 && n <= i64::MAX as i128,
            "dyadic overflow"
        );
        DyadicRational {
            numerator: n as i64,
            scale: s,
        }
    }

    /// Exact difference as `f64`; the common-scale numerator difference is
    /// converted once, so small widths at deep scales stay exact.
    pub fn diff_value(&self, other: &Self) -> f64 {
        let s = self.scale.max(other.scale);
        let a = (self.numerator as i128) << (s - self.scale);
        let b = (other.numerator as i128) << (s - other.scale);
        (a - b) as f64 / (s as f64).exp2()
    }
}

impl PartialEq for DyadicRational {
    fn eq(&self, other: &Self) -> bool {
        self.numerator == other.numerator && self.scale == other.scale
    }
}

impl Eq for DyadicRational {}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let s = self.scale.max(other.scale);
        let a = (self.numerator as i128) << (s - self.scale);
        let b = (other.numerator as i128) << (s - other.scale);
        a.cmp(&b)
    }
}

impl std::hash::Hash for DyadicRational {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.numerator.hash(state);
        self.scale.hash(state);
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: Self) -> Self {
        let s = self.scale.max(rhs.scale);
        let a = (self.numerator as i128) << (s - self.scale);
        let b = (rhs.numerator as i128) << (s - rhs.scale);
        Self::from_i128(a + b, s)
    }
}

impl Sub for DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> Self {
        DyadicRational {
            numerator: -self.numerator,
            scale: self.scale,
        }
    }
}

impl From<(i64, u32)> for DyadicRational {
    fn from((n, s): (i64, u32)) -> Self {
        Self::new(n, s)
    }
}

impl From<DyadicRational> for (i64, u32) {
    fn from(d: DyadicRational) -> Self {
        (d.numerator, d.scale)
    }
}

impl From<i64> for DyadicRational {
    fn from(k: i64) -> Self {
        Self::integer(k)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.scale)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let d = DyadicRational::new(4, 2);
        assert_eq!(d.numerator(), 1);
        assert_eq!(d.scale(), 0);
        let h = DyadicRational::new(6, 2);
        assert_eq!(h.numerator(), 3);
        assert_eq!(h.scale(), 1);
        assert_eq!(DyadicRational::new(0, 7), DyadicRational::zero());
    }

    #[test]
    fn ordering_matches_value() {
        let a = DyadicRational::new(3, 1); // 1.5
        let b = DyadicRational::new(7, 2); // 1.75
        let c = DyadicRational::integer(2);
        assert!(a < b && b < c);
        assert!(DyadicRational::new(-1, 3) < DyadicRational::zero());
    }

    #[test]
    fn arithmetic() {
        let a = DyadicRational::half(1);
        let b = DyadicRational::new(1, 2);
        assert_eq!(a + b, DyadicRational::new(3, 2));
        assert_eq!(a - a, DyadicRational::zero());
        assert_eq!(a.mul_pow2(1), DyadicRational::integer(1));
        assert_eq!(
            DyadicRational::integer(3).mul_pow2(-2),
            DyadicRational::new(3, 2)
        );
        assert_eq!(a.mul_int(6), DyadicRational::integer(3));
    }

    #[test]
    fn deep_scale_difference_is_exact() {
        let base = DyadicRational::integer(1);
        let step = DyadicRational::new(15, 60);
        let x = base + step;
        assert_eq!(x.diff_value(&base), 15.0 / 60f64.exp2());
    }
}
