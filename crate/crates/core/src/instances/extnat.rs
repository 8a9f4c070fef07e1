use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::semigroup::CuSemigroup;

/// An element of `N̄ = {0, 1, 2, …, ∞}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

pub use ExtNat::{Fin, Inf};

impl ExtNat {
    pub fn is_finite(self) -> bool {
        matches!(self, Fin(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Fin(n) => Some(n),
            Inf => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Fin(0)
    }
}

impl Add for ExtNat {
    type Output = ExtNat;
    fn add(self, o: ExtNat) -> ExtNat {
        match (self, o) {
            (Fin(a), Fin(b)) => Fin(a.checked_add(b).expect("ExtNat overflow")),
            _ => Inf,
        }
    }
}

/// Multiplication with `0 · ∞ = 0`.
impl Mul for ExtNat {
    type Output = ExtNat;
    fn mul(self, o: ExtNat) -> ExtNat {
        match (self, o) {
            (Fin(0), _) | (_, Fin(0)) => Fin(0),
            (Fin(a), Fin(b)) => Fin(a.checked_mul(b).expect("ExtNat overflow")),
            _ => Inf,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fin(n) => write!(f, "{n}"),
            Inf => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtNat {
    type Err = String;
    fn from_str(s: &str) -> Result<ExtNat, String> {
        match s.trim() {
            "inf" | "∞" => Ok(Inf),
            t => t.parse().map(Fin).map_err(|_| format!("bad extended natural `{s}`")),
        }
    }
}

/// The semigroup `N̄` itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtNatSg;

impl CuSemigroup for ExtNatSg {
    type Elem = ExtNat;

    fn name(&self) -> String {
        "Nbar".into()
    }

    fn zero(&self) -> ExtNat {
        Fin(0)
    }

    fn add(&self, a: &ExtNat, b: &ExtNat) -> ExtNat {
        *a + *b
    }

    fn leq(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a <= b
    }

    fn way_below(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a.is_finite() && a <= b
    }

    /// `{0, …, depth, ∞}`.
    fn basis(&self, depth: usize) -> Vec<ExtNat> {
        (0..=depth as u64).map(Fin).chain(std::iter::once(Inf)).collect()
    }

    fn interpolate(&self, lo: &ExtNat, hi: &ExtNat) -> Option<ExtNat> {
        if !self.way_below(lo, hi) {
            return None;
        }
        let l = lo.finite()?;
        Some(match hi {
            Inf => Fin(l + 1),
            Fin(h) if l + 1 < *h => Fin(l + 1),
            _ => *lo,
        })
    }

    fn inf_multiple(&self, x: &ExtNat) -> ExtNat {
        if x.is_zero() {
            Fin(0)
        } else {
            Inf
        }
    }

    fn encode(&self, x: &ExtNat) -> String {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::check_axioms;

    #[test]
    fn infinity_is_not_compact() {
        let s = ExtNatSg;
        assert!(!s.way_below(&Inf, &Inf));
        assert!(s.way_below(&Fin(3), &Inf));
        assert!(s.way_below(&Fin(3), &Fin(3)));
    }

    #[test]
    fn axioms_depth_20() {
        let r = check_axioms(&ExtNatSg, 20);
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn zero_times_infinity() {
        assert_eq!(Fin(0) * Inf, Fin(0));
        assert_eq!(Fin(2) * Inf, Inf);
    }
}
