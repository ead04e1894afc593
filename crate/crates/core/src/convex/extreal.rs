use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

/// A real number or `+∞`, the codomain of perspectives and recession functions.
///
/// `+∞` absorbs addition and compares greater than every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Lossy view as an `f64`, mapping `+∞` to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some(a.total_cmp(b)),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

/// Scaling by a nonnegative factor; `0 · (+∞)` is taken as `+∞`.
impl Mul<f64> for ExtReal {
    type Output = ExtReal;

    fn mul(self, rhs: f64) -> ExtReal {
        debug_assert!(rhs >= 0.0);
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a * rhs),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl std::iter::Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> Self {
        iter.fold(ExtReal::ZERO, |acc, v| acc + v)
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_and_dominates() {
        assert_eq!(ExtReal::PosInf + 3.0, ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::PosInf, ExtReal::PosInf);
        assert!(ExtReal::PosInf > ExtReal::Finite(1e300));
        assert!(ExtReal::Finite(-1.0) < ExtReal::Finite(0.0));
        assert_eq!(ExtReal::PosInf.partial_cmp(&ExtReal::PosInf), Some(Ordering::Equal));
        let total: ExtReal = [ExtReal::Finite(1.0), ExtReal::Finite(2.0)].into_iter().sum();
        assert_eq!(total, ExtReal::Finite(3.0));
    }
}
