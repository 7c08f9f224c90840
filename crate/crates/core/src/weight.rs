//! Exact clause weights: arbitrary-precision integers extended with infinity.
//!
//! Weight arithmetic follows the extended rules `inf + w = inf` and
//! `inf - w = inf` for every `w`. Finite values may go negative; negative
//! weights only ever enter a formula through the virtual rule.

use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// A clause weight: a finite exact integer or infinity (hard).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Weight {
    Finite(BigInt),
    Infinite,
}

impl Weight {
    pub fn finite(v: i64) -> Self {
        Weight::Finite(BigInt::from(v))
    }

    pub fn zero() -> Self {
        Weight::Finite(BigInt::zero())
    }

    pub fn one() -> Self {
        Weight::finite(1)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Weight::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Weight::Finite(v) if v.is_zero())
    }

    /// Strictly positive; infinity counts as positive.
    pub fn is_positive(&self) -> bool {
        match self {
            Weight::Finite(v) => v.is_positive(),
            Weight::Infinite => true,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Weight::Finite(v) if v.is_negative())
    }

    pub fn plus(&self, other: &Weight) -> Weight {
        match (self, other) {
            (Weight::Infinite, _) | (_, Weight::Infinite) => Weight::Infinite,
            (Weight::Finite(a), Weight::Finite(b)) => Weight::Finite(a + b),
        }
    }

    /// Remaining weight after consuming `amount` from this availability.
    ///
    /// `inf - w = inf` including `w = inf`: hard mass is never exhausted.
    /// Returns `None` when `amount` exceeds what is available.
    pub fn consume(&self, amount: &Weight) -> Option<Weight> {
        match (self, amount) {
            (Weight::Infinite, _) => Some(Weight::Infinite),
            (Weight::Finite(_), Weight::Infinite) => None,
            (Weight::Finite(have), Weight::Finite(take)) => {
                if take > have {
                    None
                } else {
                    Some(Weight::Finite(have - take))
                }
            }
        }
    }

    /// Negation of a finite weight; infinity has none.
    pub fn negated(&self) -> Option<Weight> {
        match self {
            Weight::Finite(v) => Some(Weight::Finite(-v)),
            Weight::Infinite => None,
        }
    }

    pub fn as_finite(&self) -> Option<&BigInt> {
        match self {
            Weight::Finite(v) => Some(v),
            Weight::Infinite => None,
        }
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (Weight::Infinite, Weight::Infinite) => Ordering::Equal,
            (Weight::Infinite, Weight::Finite(_)) => Ordering::Greater,
            (Weight::Finite(_), Weight::Infinite) => Ordering::Less,
            (Weight::Finite(a), Weight::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for &Weight {
    type Output = Weight;

    fn add(self, rhs: &Weight) -> Weight {
        self.plus(rhs)
    }
}

impl From<i64> for Weight {
    fn from(v: i64) -> Self {
        Weight::finite(v)
    }
}

impl From<BigInt> for Weight {
    fn from(v: BigInt) -> Self {
        Weight::Finite(v)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(v) => write!(f, "{v}"),
            Weight::Infinite => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs() {
        let inf = Weight::Infinite;
        assert_eq!(inf.plus(&Weight::finite(5)), Weight::Infinite);
        assert_eq!(Weight::finite(-3).plus(&inf), Weight::Infinite);
        assert_eq!(inf.consume(&Weight::finite(7)), Some(Weight::Infinite));
        assert_eq!(inf.consume(&Weight::Infinite), Some(Weight::Infinite));
    }

    #[test]
    fn finite_consumption_is_bounded() {
        assert_eq!(
            Weight::finite(5).consume(&Weight::finite(2)),
            Some(Weight::finite(3))
        );
        assert_eq!(Weight::finite(1).consume(&Weight::finite(2)), None);
        assert_eq!(Weight::finite(1).consume(&Weight::Infinite), None);
    }

    #[test]
    fn ordering_puts_infinity_on_top() {
        assert!(Weight::Infinite > Weight::finite(i64::MAX));
        assert!(Weight::finite(-1) < Weight::zero());
    }
}
