//! The non-amalgamable pair `1 ↦ 4`, `1 ↦ 5` out of `E_1` into `E_6` among
//! order embeddings: exhaustive search and an interval certificate.

use serde::{Deserialize, Serialize};

use super::{amalgamate, ElemEmb};
use crate::error::{CuError, Result};
use crate::hom::ElementaryHom;
use crate::instances::{Elementary, Fin};
use crate::rational::Q;
use crate::semigroup::FiniteSubset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub max_m: u64,
    pub codomains_tried: u64,
    pub pairs_tried: u64,
    pub found: Option<(u64, ElementaryHom, ElementaryHom)>,
}

/// Searches every codomain `E_m`, `m ≤ max_m`, and every pair of embeddings
/// out of `E_n` for an amalgamation of `1 ↦ a1`, `1 ↦ a2` over `F = {1}`.
pub fn amalgamation_obstruction_search(a1: u64, a2: u64, n: u64, max_m: u64) -> Result<ObstructionReport> {
    let alpha1 = ElementaryHom::new(1, n, Fin(a1))?;
    let alpha2 = ElementaryHom::new(1, n, Fin(a2))?;
    let f = FiniteSubset::new(&Elementary::new(1)?, [Fin(1)]);
    let mut report = ObstructionReport { max_m, codomains_tried: max_m, pairs_tried: 0, found: None };
    for m in 1..=max_m {
        let ks = crate::hom::elementary_enumerate(n, m, crate::hom::HomKind::Embeddings);
        report.pairs_tried += (ks.len() * ks.len()) as u64;
    }
    match amalgamate(&ElemEmb, &alpha1, &alpha2, &f, max_m as usize) {
        Ok(am) => report.found = Some((am.object, am.beta1, am.beta2)),
        Err(CuError::Exhausted { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Embeddings `E_n → E_m` are `1 ↦ k` with `m/(n+1) < k ≤ m/n`, so the images
/// of `1` under `β_i ∘ α_i` fill `(a_i m/(n+1), a_i m/n]`, below `m` when
/// `a_i < n`. An amalgamation over `{1}` needs a common value; the
/// certificate records the intervals as multiples of `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCertificate {
    pub first: (Q, Q),
    pub second: (Q, Q),
    pub values_finite: bool,
    pub disjoint: bool,
}

impl IntervalCertificate {
    pub fn holds(&self) -> bool {
        self.values_finite && self.disjoint
    }
}

pub fn interval_certificate(a1: u64, a2: u64, n: u64) -> IntervalCertificate {
    let iv = |a: u64| (Q::new(a as i64, n as i64 + 1), Q::new(a as i64, n as i64));
    let (first, second) = (iv(a1), iv(a2));
    // half-open (lo, hi] intervals scaled by m > 0 are disjoint iff one ends
    // at or before the other starts
    let disjoint = first.1 <= second.0 || second.1 <= first.0;
    IntervalCertificate { values_finite: a1 < n && a2 < n, disjoint, first, second }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_five_certificate() {
        let c = interval_certificate(4, 5, 6);
        assert_eq!(c.first, (Q::new(4, 7), Q::new(2, 3)));
        assert_eq!(c.second, (Q::new(5, 7), Q::new(5, 6)));
        assert!(c.holds());
        assert!(!interval_certificate(5, 6, 6).holds());
    }

    #[test]
    fn small_search() {
        let r = amalgamation_obstruction_search(4, 5, 6, 60).unwrap();
        assert!(r.found.is_none());
        let r = amalgamation_obstruction_search(4, 4, 6, 12).unwrap();
        assert!(r.found.is_some());
    }
}
