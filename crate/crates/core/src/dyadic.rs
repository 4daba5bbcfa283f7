//! Exact non-negative dyadic rationals: values of the form `num / 2^exp`.
//!
//! Every probability produced by exact enumeration in this crate is dyadic,
//! so equality checks reduce to comparing canonical `(num, exp)` pairs.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;

/// A non-negative dyadic rational, kept in reduced form: either `num` is odd,
/// or the value is exactly zero (`num == 0`, `exp == 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    num: BigUint,
    exp: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { num: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigUint::one(), exp: 0 }
    }

    /// `num / 2^exp`, reduced.
    pub fn new(num: BigUint, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.reduce();
        d
    }

    /// `num / 2^exp` from machine integers.
    pub fn from_ratio(num: u64, exp: u32) -> Self {
        Self::new(BigUint::from(num), exp)
    }

    /// `1 / 2^exp`.
    pub fn pow2_inv(exp: u32) -> Self {
        Dyadic { num: BigUint::one(), exp }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0 && self.num.is_one()
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    /// Log2 of the denominator in reduced form.
    pub fn log2_denominator(&self) -> u32 {
        self.exp
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let shift = self.num.trailing_zeros().unwrap_or(0).min(u64::from(self.exp));
        if shift > 0 {
            self.num >>= shift;
            self.exp -= shift as u32;
        }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let a = &self.num << u64::from(exp - self.exp);
        let b = &other.num << u64::from(exp - other.exp);
        Dyadic::new(a + b, exp)
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let a = &self.num << u64::from(exp - self.exp);
        let b = &other.num << u64::from(exp - other.exp);
        let diff = if a >= b { a - b } else { b - a };
        Dyadic::new(diff, exp)
    }

    /// `self / 2`.
    pub fn halve(&self) -> Dyadic {
        Dyadic::new(self.num.clone(), self.exp.saturating_add(1))
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        // Whole numbers can carry even numerators, so reduce again.
        Dyadic::new(&self.num * &other.num, self.exp + other.exp)
    }

    /// `self - other`; both operands are probabilities, so the caller
    /// guarantees `other <= self`.
    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        assert!(other <= self, "dyadic subtraction would go negative");
        self.abs_diff(other)
    }

    pub fn to_f64(&self) -> f64 {
        let mut num = self.num.clone();
        let mut exp = i64::from(self.exp);
        // Keep the numerator in f64 range; probabilities never overflow upward.
        while num.bits() > 52 {
            num >>= 1u8;
            exp -= 1;
        }
        let n: u64 = num.try_into().unwrap_or(u64::MAX);
        (n as f64) * (2f64).powi(-(exp as i32))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.num << u64::from(exp - self.exp);
        let b = &other.num << u64::from(exp - other.exp);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigUint::one() << u64::from(self.exp))
        }
    }
}
