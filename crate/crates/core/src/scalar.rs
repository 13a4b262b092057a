//! Numeric traits shared by the graph algorithms and the LP machinery.
//!
//! Graph weights only need an ordered additive group ([`Weight`]); the simplex
//! additionally divides, so it asks for a [`Field`]. Exact types report zero
//! tolerances and every comparison is then strict.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Ordered number type usable as an arc weight or flow capacity.
pub trait Weight:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Slack used when comparing residual capacities and pivots against zero.
    fn tolerance() -> Self;

    /// Slack for the "cut value below one" test in separation.
    fn cut_tolerance() -> Self;

    /// Lossless conversion from an integer cost.
    fn from_cost(c: i64) -> Self {
        Self::from_i64(c).expect("integer cost representable in scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `self > other + tolerance`.
    fn definitely_gt(&self, other: &Self) -> bool {
        self.clone() - other.clone() > Self::tolerance()
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }
}

/// A [`Weight`] with exact (or IEEE) division, suitable for pivoting.
pub trait Field: Weight {
    /// Smallest pivot magnitude accepted by the simplex.
    fn pivot_tolerance() -> Self;
}

impl Weight for i64 {
    fn tolerance() -> Self {
        0
    }
    fn cut_tolerance() -> Self {
        0
    }
}

impl Weight for f64 {
    fn tolerance() -> Self {
        1e-9
    }
    fn cut_tolerance() -> Self {
        1e-6
    }
}

impl Field for f64 {
    fn pivot_tolerance() -> Self {
        1e-9
    }
}

impl Weight for f32 {
    fn tolerance() -> Self {
        1e-5
    }
    fn cut_tolerance() -> Self {
        1e-4
    }
}

impl Field for f32 {
    fn pivot_tolerance() -> Self {
        1e-5
    }
}

impl Weight for BigRational {
    fn tolerance() -> Self {
        Self::zero()
    }
    fn cut_tolerance() -> Self {
        Self::zero()
    }
    fn from_cost(c: i64) -> Self {
        Ratio::from_integer(BigInt::from(c))
    }
}

impl Field for BigRational {
    fn pivot_tolerance() -> Self {
        Self::zero()
    }
}

/// Builds an exact rational `num / den`.
pub fn rational(num: i64, den: i64) -> BigRational {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_types_have_zero_slack() {
        assert!(BigRational::tolerance().is_zero());
        assert_eq!(i64::cut_tolerance(), 0);
        assert!(f64::cut_tolerance() > 0.0);
    }

    #[test]
    fn rational_from_cost_is_exact() {
        let r = BigRational::from_cost(1_000_000_007);
        assert_eq!(r.to_integer(), BigInt::from(1_000_000_007i64));
        assert_eq!(rational(3, 6), rational(1, 2));
    }

    #[test]
    fn definitely_gt_respects_tolerance() {
        assert!(!1.0f64.definitely_gt(&(1.0 - 1e-12)));
        assert!(1.0f64.definitely_gt(&0.5));
        assert!(rational(1, 1_000_000_000).definitely_gt(&BigRational::zero()));
    }
}
