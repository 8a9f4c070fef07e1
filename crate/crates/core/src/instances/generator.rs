//! The generator `G = {f ∈ Lsc([0,1], N̄) : f(0) = 0, f increasing}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instances::extnat::{ExtNat, Fin, Inf};
use crate::instances::lsc::StepLsc;
use crate::rational::Q;
use crate::semigroup::CuSemigroup;

/// An increasing step function, stored through its level thresholds:
/// `{f ≥ k} = (t_k, 1]`, and `f = ∞` on `(inf_from, 1]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GElem {
    levels: Vec<Q>,
    inf_from: Option<Q>,
}

impl GElem {
    pub fn zero() -> GElem {
        GElem { levels: vec![], inf_from: None }
    }

    /// `1_{(t,1]}`.
    pub fn chain(t: &Q) -> GElem {
        GElem::from_levels(vec![t.clone()], None)
    }

    pub fn from_levels(mut levels: Vec<Q>, inf_from: Option<Q>) -> GElem {
        let zero = Q::zero();
        levels.retain(|t| *t < Q::one());
        for t in levels.iter_mut() {
            if *t < zero {
                *t = zero.clone();
            }
        }
        levels.sort();
        let inf_from = inf_from.filter(|t| *t < Q::one()).map(|t| t.max(Q::zero()));
        if let Some(ti) = &inf_from {
            levels.retain(|t| t < ti);
        }
        GElem { levels, inf_from }
    }

    pub fn levels(&self) -> &[Q] {
        &self.levels
    }

    pub fn inf_from(&self) -> Option<&Q> {
        self.inf_from.as_ref()
    }

    pub fn is_finite(&self) -> bool {
        self.inf_from.is_none()
    }

    /// `t_k` with `{f ≥ k} = (t_k, 1]`; `1` encodes the empty set.
    pub fn threshold(&self, k: usize) -> Q {
        self.threshold_ref(k).cloned().unwrap_or_else(Q::one)
    }

    /// `t_k`, or `None` for the empty level set.
    fn threshold_ref(&self, k: usize) -> Option<&Q> {
        debug_assert!(k >= 1);
        self.levels.get(k - 1).or(self.inf_from.as_ref())
    }

    pub fn eval(&self, x: &Q) -> ExtNat {
        if matches!(&self.inf_from, Some(t) if x > t) {
            return Inf;
        }
        Fin(self.levels.iter().filter(|t| x > *t).count() as u64)
    }

    pub fn to_lsc(&self) -> StepLsc {
        let mut acc = StepLsc::zero();
        for t in &self.levels {
            acc = acc.sum(&StepLsc::upper(t));
        }
        if let Some(t) = &self.inf_from {
            acc = acc.sum(&StepLsc::upper(t).scale(Inf));
        }
        acc
    }
}

impl fmt::Debug for GElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.levels.iter().map(|t| t.to_string()).collect();
        write!(f, "G[{}", parts.join(","))?;
        if let Some(t) = &self.inf_from {
            write!(f, ";inf>{t}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeneratorG;

impl CuSemigroup for GeneratorG {
    type Elem = GElem;

    fn name(&self) -> String {
        "G".into()
    }

    fn zero(&self) -> GElem {
        GElem::zero()
    }

    fn add(&self, a: &GElem, b: &GElem) -> GElem {
        let levels = a.levels.iter().chain(&b.levels).cloned().collect();
        let inf_from = match (&a.inf_from, &b.inf_from) {
            (Some(x), Some(y)) => Some(x.clone().min(y.clone())),
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        };
        GElem::from_levels(levels, inf_from)
    }

    fn leq(&self, a: &GElem, b: &GElem) -> bool {
        if let Some(ta) = &a.inf_from {
            match &b.inf_from {
                Some(tb) if tb <= ta => {}
                _ => return false,
            }
        }
        let n = a.levels.len().max(b.levels.len()) + 1;
        let one = Q::one();
        (1..=n).all(|k| a.threshold_ref(k).unwrap_or(&one) >= b.threshold_ref(k).unwrap_or(&one))
    }

    fn way_below(&self, a: &GElem, b: &GElem) -> bool {
        let one = Q::one();
        a.is_finite()
            && (1..=a.levels.len()).all(|k| b.threshold_ref(k).unwrap_or(&one) < a.threshold_ref(k).unwrap_or(&one))
    }

    /// Sums of at most two chain generators with thresholds on the grid `2^-depth`.
    fn basis(&self, depth: usize) -> Vec<GElem> {
        let m = 1i64 << depth;
        let ts: Vec<Q> = (0..m).map(|j| Q::new(j, m)).collect();
        let mut out = vec![GElem::zero()];
        for i in 0..ts.len() {
            out.push(GElem::chain(&ts[i]));
            for j in i..ts.len() {
                out.push(GElem::from_levels(vec![ts[i].clone(), ts[j].clone()], None));
            }
        }
        out.sort();
        out
    }

    fn interpolate(&self, lo: &GElem, hi: &GElem) -> Option<GElem> {
        if !self.way_below(lo, hi) {
            return None;
        }
        let levels = (1..=lo.levels.len())
            .map(|k| lo.threshold(k).mid(&hi.threshold(k)))
            .collect();
        Some(GElem::from_levels(levels, None))
    }

    fn inf_multiple(&self, x: &GElem) -> GElem {
        match (x.levels.first(), &x.inf_from) {
            (Some(t), _) => GElem::from_levels(vec![], Some(t.clone())),
            (None, Some(t)) => GElem::from_levels(vec![], Some(t.clone())),
            (None, None) => GElem::zero(),
        }
    }

    fn encode(&self, x: &GElem) -> String {
        format!("{x:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::semigroup::check_axioms;

    #[test]
    fn chain_order() {
        let g = GeneratorG;
        let a = GElem::chain(&q(1, 2));
        let b = GElem::chain(&q(1, 4));
        assert!(g.leq(&a, &b));
        assert!(!g.leq(&b, &a));
        assert!(g.way_below(&a, &b));
        assert!(!g.way_below(&a, &a));
    }

    #[test]
    fn agrees_with_lsc() {
        let g = GeneratorG;
        let b = g.basis(2);
        for x in &b {
            for y in &b {
                assert_eq!(g.leq(x, y), x.to_lsc().leq(&y.to_lsc()), "{x:?} {y:?}");
                assert_eq!(g.way_below(x, y), x.to_lsc().way_below(&y.to_lsc()), "{x:?} {y:?}");
                assert_eq!(g.add(x, y).to_lsc(), x.to_lsc().sum(&y.to_lsc()));
            }
        }
    }

    #[test]
    fn axioms() {
        let r = check_axioms(&GeneratorG, 3);
        assert!(r.passed(), "{:?}", r.violations);
    }
}
