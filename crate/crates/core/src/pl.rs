//! Exact piecewise-linear maps of `[0,1]`, the morphisms they induce on
//! `Lsc([0,1], N̄)`, and the Mountain Climbing solver.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CuError, Result};
use crate::hom::Hom;
use crate::instances::{LscInterval, StepLsc};
use crate::rational::Q;
use crate::semigroup::{compare_maps, FiniteSubset};

/// A continuous piecewise-linear map on `[0,1]` through the points
/// `(breaks[i], values[i])`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlMap {
    breaks: Vec<Q>,
    values: Vec<Q>,
}

impl fmt::Debug for PlMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self
            .breaks
            .iter()
            .zip(&self.values)
            .map(|(x, y)| format!("{x}->{y}"))
            .collect();
        write!(f, "PL[{}]", pts.join(", "))
    }
}

impl PlMap {
    pub fn new(breaks: Vec<Q>, values: Vec<Q>) -> Result<PlMap> {
        if breaks.len() < 2 || breaks.len() != values.len() {
            return Err(CuError::InvalidParameter("a PL map needs at least two points".into()));
        }
        if breaks[0] != Q::zero() || breaks[breaks.len() - 1] != Q::one() {
            return Err(CuError::InvalidParameter("breakpoints must run from 0 to 1".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CuError::InvalidParameter("breakpoints must increase".into()));
        }
        Ok(PlMap { breaks, values })
    }

    /// Values at equally spaced breakpoints.
    pub fn uniform(values: Vec<Q>) -> Result<PlMap> {
        let k = values.len() as i64 - 1;
        if k < 1 {
            return Err(CuError::InvalidParameter("a PL map needs at least two points".into()));
        }
        PlMap::new((0..=k).map(|i| Q::new(i, k)).collect(), values)
    }

    /// A strictly piecewise-monotone surjection: surjective onto `[0,1]`
    /// without constancy intervals.
    pub fn surjection(breaks: Vec<Q>, values: Vec<Q>) -> Result<PlMap> {
        let f = PlMap::new(breaks, values)?;
        f.check_strict_surjection()?;
        Ok(f)
    }

    pub fn identity() -> PlMap {
        PlMap { breaks: vec![Q::zero(), Q::one()], values: vec![Q::zero(), Q::one()] }
    }

    pub fn reversal() -> PlMap {
        PlMap { breaks: vec![Q::zero(), Q::one()], values: vec![Q::one(), Q::zero()] }
    }

    pub fn constant(c: Q) -> PlMap {
        PlMap { breaks: vec![Q::zero(), Q::one()], values: vec![c.clone(), c] }
    }

    pub fn breaks(&self) -> &[Q] {
        &self.breaks
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn eval(&self, x: &Q) -> Q {
        match self.breaks.binary_search(x) {
            Ok(i) => self.values[i].clone(),
            Err(i) => {
                let (x0, x1) = (&self.breaks[i - 1], &self.breaks[i]);
                let (y0, y1) = (&self.values[i - 1], &self.values[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn min_value(&self) -> Q {
        self.values.iter().min().cloned().expect("nonempty")
    }

    pub fn max_value(&self) -> Q {
        self.values.iter().max().cloned().expect("nonempty")
    }

    pub fn maps_into_unit(&self) -> bool {
        self.min_value() >= Q::zero() && self.max_value() <= Q::one()
    }

    pub fn is_surjective(&self) -> bool {
        self.min_value() == Q::zero() && self.max_value() == Q::one()
    }

    pub fn has_flat_piece(&self) -> bool {
        self.values.windows(2).any(|w| w[0] == w[1])
    }

    pub fn is_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn check_strict_surjection(&self) -> Result<()> {
        if !self.maps_into_unit() || !self.is_surjective() {
            return Err(CuError::Precondition(format!("{self:?} is not a surjection of [0,1]")));
        }
        if self.has_flat_piece() {
            return Err(CuError::Precondition(format!("{self:?} has a constancy interval")));
        }
        Ok(())
    }

    /// Drops interior breakpoints where the slope does not change.
    pub fn normalized(&self) -> PlMap {
        let mut b = vec![self.breaks[0].clone()];
        let mut v = vec![self.values[0].clone()];
        for i in 1..self.breaks.len() - 1 {
            let s0 = (&self.values[i] - &v[v.len() - 1]) / (&self.breaks[i] - &b[b.len() - 1]);
            let s1 = (&self.values[i + 1] - &self.values[i]) / (&self.breaks[i + 1] - &self.breaks[i]);
            if s0 != s1 {
                b.push(self.breaks[i].clone());
                v.push(self.values[i].clone());
            }
        }
        b.push(self.breaks[self.breaks.len() - 1].clone());
        v.push(self.values[self.values.len() - 1].clone());
        PlMap { breaks: b, values: v }
    }

    /// All `x` with `f(x) = y` on non-constant pieces, plus the ends of constant
    /// pieces at height `y`.
    pub fn preimage_points(&self, y: &Q) -> Vec<Q> {
        let mut out = vec![];
        for i in 0..self.pieces() {
            let (y0, y1) = (&self.values[i], &self.values[i + 1]);
            if y0 == y1 {
                if y0 == y {
                    out.push(self.breaks[i].clone());
                    out.push(self.breaks[i + 1].clone());
                }
                continue;
            }
            let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            if lo <= y && y <= hi {
                let (x0, x1) = (&self.breaks[i], &self.breaks[i + 1]);
                out.push(x0 + (y - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// `self ∘ inner`; `inner` must map into `[0,1]`.
    pub fn compose(&self, inner: &PlMap) -> PlMap {
        let mut xs: Vec<Q> = inner.breaks.clone();
        for b in &self.breaks {
            xs.extend(inner.preimage_points(b));
        }
        xs.sort();
        xs.dedup();
        let values = xs.iter().map(|x| self.eval(&inner.eval(x))).collect();
        PlMap { breaks: xs, values }.normalized()
    }

    /// Pointwise `self + c`.
    pub fn shifted(&self, c: &Q) -> PlMap {
        PlMap {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// Pointwise `min(self, c)`.
    pub fn capped(&self, c: &Q) -> PlMap {
        let mut xs = self.breaks.clone();
        xs.extend(self.preimage_points(c));
        xs.sort();
        xs.dedup();
        let values = xs.iter().map(|x| self.eval(x).min(c.clone())).collect();
        PlMap { breaks: xs, values }.normalized()
    }

    /// `l ↦ l ∘ self` on a step function.
    pub fn pull_back(&self, l: &StepLsc) -> StepLsc {
        let mut xs: Vec<Q> = self.breaks.clone();
        for node in l.nodes() {
            xs.extend(self.preimage_points(node));
        }
        xs.sort();
        xs.dedup();
        let pieces = xs.windows(2).map(|w| l.eval(&self.eval(&w[0].mid(&w[1])))).collect();
        let points = xs.iter().map(|x| l.eval(&self.eval(x))).collect();
        StepLsc::from_parts(xs, pieces, points).expect("composition with a continuous map is lsc")
    }
}

/// `sup |h1 - h2|`, attained on the union of breakpoints.
pub fn pl_sup_distance(h1: &PlMap, h2: &PlMap) -> Q {
    let mut xs: Vec<&Q> = h1.breaks.iter().chain(&h2.breaks).collect();
    xs.sort();
    xs.dedup();
    xs.into_iter()
        .map(|x| (h1.eval(x) - h2.eval(x)).abs())
        .max()
        .unwrap_or_else(Q::zero)
}

/// `pl_compose(g, h) = g ∘ h`.
pub fn pl_compose(g: &PlMap, h: &PlMap) -> PlMap {
    g.compose(h)
}

/// `Lsc(h, N̄)`: `l ↦ l ∘ h`.
pub fn pl_induced_morphism(h: &PlMap) -> Result<Hom<LscInterval, LscInterval>> {
    if !h.maps_into_unit() || !h.is_surjective() {
        return Err(CuError::Precondition(format!("{h:?} is not surjective")));
    }
    let s = Arc::new(LscInterval);
    let h2 = h.clone();
    Ok(Hom::new(s.clone(), s, format!("{h:?}"), move |l: &StepLsc| h2.pull_back(l)))
}

/// Refines the breakpoints of `f` so that consecutive breakpoints map to
/// consecutive entries of `levels`; returns the breakpoints and the level
/// index of each.
fn refine_to_levels(f: &PlMap, levels: &[Q]) -> (Vec<Q>, Vec<usize>) {
    let mut xs = f.breaks.clone();
    for v in levels {
        xs.extend(f.preimage_points(v));
    }
    xs.sort();
    xs.dedup();
    let idx = xs
        .iter()
        .map(|x| levels.binary_search(&f.eval(x)).expect("breakpoint values are levels"))
        .collect();
    (xs, idx)
}

/// Maps `g1, g2` with `f1 ∘ g1 = f2 ∘ g2`, read off a shortest path from `(0,0)`
/// to `(1,1)` in the level-set graph `{(x, y) : f1(x) = f2(y)}`.
pub fn mountain_climb(f1: &PlMap, f2: &PlMap) -> Result<(PlMap, PlMap)> {
    for f in [f1, f2] {
        f.check_strict_surjection()?;
        if f.values[0] != Q::zero() || f.values[f.values.len() - 1] != Q::one() {
            return Err(CuError::Precondition(format!("{f:?} does not fix the endpoints")));
        }
    }
    let mut levels: Vec<Q> = f1.values.iter().chain(&f2.values).cloned().collect();
    levels.sort();
    levels.dedup();
    let (xs, lx) = refine_to_levels(f1, &levels);
    let (ys, ly) = refine_to_levels(f2, &levels);
    let (nx, ny) = (xs.len(), ys.len());
    let start = (0usize, 0usize);
    let goal = (nx - 1, ny - 1);
    let mut prev: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    prev.insert(start, start);
    while let Some((p, q)) = queue.pop_front() {
        if (p, q) == goal {
            break;
        }
        let steps = [(-1i64, -1i64), (-1, 1), (1, -1), (1, 1)];
        for (dp, dq) in steps {
            let (np, nq) = (p as i64 + dp, q as i64 + dq);
            if np < 0 || nq < 0 || np >= nx as i64 || nq >= ny as i64 {
                continue;
            }
            let next = (np as usize, nq as usize);
            if lx[next.0] == ly[next.1] && !prev.contains_key(&next) {
                prev.insert(next, (p, q));
                queue.push_back(next);
            }
        }
    }
    if !prev.contains_key(&goal) {
        return Err(CuError::Exhausted { bound: nx * ny, what: "level-set path".into() });
    }
    let mut path = vec![goal];
    while *path.last().expect("nonempty") != start {
        path.push(prev[path.last().expect("nonempty")]);
    }
    path.reverse();
    let k = path.len() as i64 - 1;
    let ts: Vec<Q> = (0..=k).map(|i| Q::new(i, k)).collect();
    let g1 = PlMap::new(ts.clone(), path.iter().map(|&(p, _)| xs[p].clone()).collect())?;
    let g2 = PlMap::new(ts, path.iter().map(|&(_, q)| ys[q].clone()).collect())?;
    Ok((g1.normalized(), g2.normalized()))
}

/// Returns `(f ∘ u, u)` with `f ∘ u` fixing `0` and `1`, where `u` runs through a
/// preimage of `0`, the endpoints, and a preimage of `1`.
pub fn endpoint_normalize(f: &PlMap) -> Result<(PlMap, PlMap)> {
    if !f.maps_into_unit() || !f.is_surjective() {
        return Err(CuError::Precondition(format!("{f:?} is not surjective")));
    }
    if f.values[0] == Q::zero() && f.values[f.values.len() - 1] == Q::one() {
        return Ok((f.clone(), PlMap::identity()));
    }
    let x0 = f.preimage_points(&Q::zero())[0].clone();
    let x1 = f.preimage_points(&Q::one())[0].clone();
    let route = if x0 <= x1 {
        [x0, Q::zero(), Q::one(), x1]
    } else {
        [x0, Q::one(), Q::zero(), x1]
    };
    let mut pts: Vec<Q> = vec![];
    for p in route {
        if pts.last() != Some(&p) {
            pts.push(p);
        }
    }
    let u = PlMap::uniform(pts)?;
    Ok((f.compose(&u), u))
}

/// A map within `eps` of `f` with the same endpoint values and no constancy
/// intervals; each flat piece gets a small tooth at its midpoint.
pub fn rational_peak_approx(f: &PlMap, eps: &Q) -> Result<PlMap> {
    if !eps.is_positive() {
        return Err(CuError::InvalidParameter("eps must be positive".into()));
    }
    if !f.maps_into_unit() {
        return Err(CuError::Precondition(format!("{f:?} leaves [0,1]")));
    }
    let delta = (eps / Q::int(2)).min(Q::new(1, 2));
    let mut b = vec![f.breaks[0].clone()];
    let mut v = vec![f.values[0].clone()];
    for i in 0..f.pieces() {
        if f.values[i] == f.values[i + 1] {
            let y = &f.values[i];
            let tooth = if y + &delta <= Q::one() { y + &delta } else { y - &delta };
            b.push(f.breaks[i].mid(&f.breaks[i + 1]));
            v.push(tooth);
        }
        b.push(f.breaks[i + 1].clone());
        v.push(f.values[i + 1].clone());
    }
    Ok(PlMap { breaks: b, values: v }.normalized())
}

/// The near-amalgamation data for `Lsc(f1)`, `Lsc(f2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpAmalgam {
    pub eps: Q,
    pub u1: PlMap,
    pub u2: PlMap,
    pub h1: PlMap,
    pub h2: PlMap,
    pub g1: PlMap,
    pub g2: PlMap,
    /// `β_i = Lsc(u_i ∘ g_i)`.
    pub beta1: PlMap,
    pub beta2: PlMap,
    pub certified: bool,
}

/// Near amalgamation in the pseudo-arc category over `F ⊆ F_n`: normalize the
/// endpoints, remove flat pieces within `1/(2n)`, climb, and certify `≃_F`.
pub fn kp_amalgamate(
    f1: &PlMap,
    f2: &PlMap,
    family: &FiniteSubset<StepLsc>,
    n: usize,
) -> Result<KpAmalgam> {
    let eps = Q::new(1, n as i64);
    let (n1, u1) = endpoint_normalize(f1)?;
    let (n2, u2) = endpoint_normalize(f2)?;
    let half = &eps / Q::int(2);
    let h1 = rational_peak_approx(&n1, &half)?;
    let h2 = rational_peak_approx(&n2, &half)?;
    let (g1, g2) = mountain_climb(&h1, &h2)?;
    let beta1 = u1.compose(&g1);
    let beta2 = u2.compose(&g2);
    let c1 = f1.compose(&beta1);
    let c2 = f2.compose(&beta2);
    let certified = compare_maps(&LscInterval, |l| c1.pull_back(l), |l| c2.pull_back(l), family);
    Ok(KpAmalgam { eps, u1, u2, h1, h2, g1, g2, beta1, beta2, certified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Interval;
    use crate::rational::q;

    fn tent() -> PlMap {
        PlMap::uniform(vec![q(0, 1), q(1, 1), q(0, 1)]).unwrap()
    }

    #[test]
    fn tent_preimage() {
        let t = tent();
        assert!(t.is_surjective());
        let v = StepLsc::indicator(&[Interval::open(q(1, 2), q(2, 1))]);
        let pre = t.pull_back(&v);
        assert_eq!(pre, StepLsc::indicator(&[Interval::open(q(1, 4), q(3, 4))]));
    }

    #[test]
    fn reversal_preimage() {
        let r = PlMap::reversal();
        let v = StepLsc::indicator(&[Interval::open(q(1, 5), q(1, 2))]);
        assert_eq!(r.pull_back(&v), StepLsc::indicator(&[Interval::open(q(1, 2), q(4, 5))]));
    }

    #[test]
    fn compose_and_normal_form() {
        let t = tent();
        let id = PlMap::identity();
        assert_eq!(t.compose(&id), t);
        assert_eq!(id.compose(&t), t);
        let tt = t.compose(&t);
        assert_eq!(tt.pieces(), 4);
        assert_eq!(tt.eval(&q(1, 4)), q(1, 1));
        assert_eq!(pl_sup_distance(&t, &t), Q::zero());
        assert_eq!(pl_sup_distance(&id, &PlMap::reversal()), Q::one());
    }

    #[test]
    fn climb_identity_and_zigzag() {
        let id = PlMap::identity();
        let (g1, g2) = mountain_climb(&id, &id).unwrap();
        assert_eq!((g1, g2), (id.clone(), id.clone()));
        let f2 = PlMap::uniform(vec![q(0, 1), q(2, 3), q(1, 3), q(1, 1)]).unwrap();
        let (g1, g2) = mountain_climb(&id, &f2).unwrap();
        assert_eq!(id.compose(&g1), f2.compose(&g2));
    }

    #[test]
    fn climb_rejects_flat_pieces() {
        let flat = PlMap::uniform(vec![q(0, 1), q(1, 2), q(1, 2), q(1, 1)]).unwrap();
        assert!(mountain_climb(&flat, &PlMap::identity()).is_err());
    }

    #[test]
    fn normalize_endpoints() {
        let r = PlMap::reversal();
        let (n, u) = endpoint_normalize(&r).unwrap();
        assert_eq!(u, PlMap::reversal());
        assert_eq!(n, PlMap::identity());
        let f = PlMap::uniform(vec![q(1, 2), q(0, 1), q(1, 1), q(1, 2)]).unwrap();
        let (n, _) = endpoint_normalize(&f).unwrap();
        assert_eq!(n.eval(&Q::zero()), Q::zero());
        assert_eq!(n.eval(&Q::one()), Q::one());
        assert!(n.is_surjective() && !n.has_flat_piece());
    }

    #[test]
    fn peaks_replace_flats() {
        let flat = PlMap::uniform(vec![q(0, 1), q(1, 2), q(1, 2), q(1, 1)]).unwrap();
        let h = rational_peak_approx(&flat, &q(1, 10)).unwrap();
        assert!(!h.has_flat_piece());
        assert!(pl_sup_distance(&flat, &h) < q(1, 10));
        assert_eq!(rational_peak_approx(&tent(), &q(1, 10)).unwrap(), tent());
    }
}
