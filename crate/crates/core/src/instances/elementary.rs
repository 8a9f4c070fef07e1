use crate::error::{CuError, Result};
use crate::instances::extnat::{ExtNat, Fin, Inf};
use crate::semigroup::CuSemigroup;

/// `E_n = {0, 1, …, n, ∞}` with saturating addition; every element is compact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Elementary {
    n: u64,
}

impl Elementary {
    pub fn new(n: u64) -> Result<Elementary> {
        if n == 0 {
            return Err(CuError::InvalidParameter("E_n needs n >= 1".into()));
        }
        Ok(Elementary { n })
    }

    pub fn bound(&self) -> u64 {
        self.n
    }

    /// Saturated value: finite values above `n` become `∞`.
    pub fn clamp(&self, x: ExtNat) -> ExtNat {
        match x {
            Fin(v) if v <= self.n => Fin(v),
            _ => Inf,
        }
    }

    pub fn elements(&self) -> Vec<ExtNat> {
        (0..=self.n).map(Fin).chain(std::iter::once(Inf)).collect()
    }

    pub fn contains(&self, x: &ExtNat) -> bool {
        matches!(x, Inf) || matches!(x, Fin(v) if *v <= self.n)
    }
}

impl CuSemigroup for Elementary {
    type Elem = ExtNat;

    fn name(&self) -> String {
        format!("E_{}", self.n)
    }

    fn zero(&self) -> ExtNat {
        Fin(0)
    }

    fn add(&self, a: &ExtNat, b: &ExtNat) -> ExtNat {
        match (a, b) {
            (Fin(x), Fin(y)) => self.clamp(Fin(x.saturating_add(*y))),
            _ => Inf,
        }
    }

    fn leq(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a <= b
    }

    fn way_below(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a <= b
    }

    /// `{0, …, min(n, depth), ∞}`; the whole carrier once `depth >= n`.
    fn basis(&self, depth: usize) -> Vec<ExtNat> {
        let top = self.n.min(depth as u64);
        (0..=top).map(Fin).chain(std::iter::once(Inf)).collect()
    }

    fn interpolate(&self, lo: &ExtNat, hi: &ExtNat) -> Option<ExtNat> {
        if lo > hi {
            return None;
        }
        Some(match (lo, hi) {
            (Fin(l), Inf) if *l < self.n => Fin(l + 1),
            (Fin(l), Fin(h)) if l + 1 < *h => Fin(l + 1),
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

/// The two-point semigroup `{0, ∞}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TwoPoint;

impl CuSemigroup for TwoPoint {
    type Elem = ExtNat;

    fn name(&self) -> String {
        "{0,inf}".into()
    }

    fn zero(&self) -> ExtNat {
        Fin(0)
    }

    fn add(&self, a: &ExtNat, b: &ExtNat) -> ExtNat {
        if a.is_zero() && b.is_zero() {
            Fin(0)
        } else {
            Inf
        }
    }

    fn leq(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a <= b
    }

    fn way_below(&self, a: &ExtNat, b: &ExtNat) -> bool {
        a <= b
    }

    fn basis(&self, _depth: usize) -> Vec<ExtNat> {
        vec![Fin(0), Inf]
    }

    fn interpolate(&self, lo: &ExtNat, hi: &ExtNat) -> Option<ExtNat> {
        (lo <= hi).then_some(*lo)
    }

    fn inf_multiple(&self, x: &ExtNat) -> ExtNat {
        *x
    }

    fn encode(&self, x: &ExtNat) -> String {
        x.to_string()
    }
}

/// Collapses a nonzero element to `∞`.
pub fn to_two_point(x: &ExtNat) -> ExtNat {
    if x.is_zero() {
        Fin(0)
    } else {
        Inf
    }
}
