use crate::error::{CuError, Result};
use crate::instances::extnat::{ExtNat, ExtNatSg, Fin};
use crate::semigroup::CuSemigroup;

/// `N̄^r` with componentwise structure; equivalently `Lsc(X_r, N̄)` for the
/// discrete set `X_r = {0, …, r-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Simplicial {
    r: usize,
}

impl Simplicial {
    pub fn new(r: usize) -> Result<Simplicial> {
        if r == 0 {
            return Err(CuError::InvalidParameter("simplicial rank must be >= 1".into()));
        }
        Ok(Simplicial { r })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    /// The generator `δ_i`.
    pub fn delta(&self, i: usize) -> Vec<ExtNat> {
        (0..self.r).map(|j| Fin(u64::from(i == j))).collect()
    }

    /// The unit `(1, …, 1)`.
    pub fn one(&self) -> Vec<ExtNat> {
        vec![Fin(1); self.r]
    }

    /// Indicator `1_U` of a subset of `X_r`.
    pub fn indicator(&self, u: &[usize]) -> Vec<ExtNat> {
        (0..self.r).map(|j| Fin(u64::from(u.contains(&j)))).collect()
    }

    /// All indicators, indexed by bitmask.
    pub fn indicators(&self) -> Vec<Vec<ExtNat>> {
        (0..1usize << self.r)
            .map(|mask| (0..self.r).map(|j| Fin(((mask >> j) & 1) as u64)).collect())
            .collect()
    }
}

fn cartesian(r: usize, values: &[ExtNat]) -> Vec<Vec<ExtNat>> {
    let mut out = vec![Vec::with_capacity(r)];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

impl CuSemigroup for Simplicial {
    type Elem = Vec<ExtNat>;

    fn name(&self) -> String {
        format!("Nbar^{}", self.r)
    }

    fn zero(&self) -> Vec<ExtNat> {
        vec![Fin(0); self.r]
    }

    fn add(&self, a: &Vec<ExtNat>, b: &Vec<ExtNat>) -> Vec<ExtNat> {
        a.iter().zip(b).map(|(x, y)| *x + *y).collect()
    }

    fn leq(&self, a: &Vec<ExtNat>, b: &Vec<ExtNat>) -> bool {
        a.iter().zip(b).all(|(x, y)| x <= y)
    }

    fn way_below(&self, a: &Vec<ExtNat>, b: &Vec<ExtNat>) -> bool {
        a.iter().zip(b).all(|(x, y)| ExtNatSg.way_below(x, y))
    }

    /// Tuples with entries in `{0, …, depth, ∞}`.
    fn basis(&self, depth: usize) -> Vec<Vec<ExtNat>> {
        cartesian(self.r, &ExtNatSg.basis(depth))
    }

    fn interpolate(&self, lo: &Vec<ExtNat>, hi: &Vec<ExtNat>) -> Option<Vec<ExtNat>> {
        lo.iter()
            .zip(hi)
            .map(|(x, y)| ExtNatSg.interpolate(x, y))
            .collect()
    }

    fn inf_multiple(&self, x: &Vec<ExtNat>) -> Vec<ExtNat> {
        x.iter().map(|v| ExtNatSg.inf_multiple(v)).collect()
    }

    fn encode(&self, x: &Vec<ExtNat>) -> String {
        let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::check_axioms;

    #[test]
    fn axioms() {
        for r in 1..=2 {
            let s = Simplicial::new(r).unwrap();
            let rep = check_axioms(&s, 3);
            assert!(rep.passed(), "{:?}", rep.violations);
        }
    }

    #[test]
    fn generators() {
        let s = Simplicial::new(3).unwrap();
        let sum = s.sum(&[s.delta(0), s.delta(1), s.delta(2)]);
        assert_eq!(sum, s.one());
    }
}
