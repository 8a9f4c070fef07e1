//! Lower-semicontinuous step functions `[0,1] → N̄` with rational breakpoints.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instances::extnat::{ExtNat, Fin, Inf};
use crate::rational::Q;
use crate::semigroup::CuSemigroup;

/// An interval of `[0,1]` with rational endpoints.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// The relatively open interval `(a, b) ∩ [0,1]`; it contains `0` only when
    /// `a < 0` and `1` only when `b > 1`.
    pub fn open(a: Q, b: Q) -> Interval {
        let lo_closed = a < Q::zero();
        let hi_closed = b > Q::one();
        Interval {
            lo: a.max(Q::zero()),
            hi: b.min(Q::one()),
            lo_closed,
            hi_closed,
        }
    }

    pub fn closed(a: Q, b: Q) -> Interval {
        Interval {
            lo: a,
            hi: b,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: &Q) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

struct Aligned {
    nodes: Vec<Q>,
    p1: Vec<ExtNat>,
    q1: Vec<ExtNat>,
    p2: Vec<ExtNat>,
    q2: Vec<ExtNat>,
}

/// A step function given by nodes `0 = n_0 < n_1 < … < n_k = 1`, a value on each
/// open piece `(n_i, n_{i+1})` and a value at each node, never above an
/// adjacent piece.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StepLsc {
    nodes: Vec<Q>,
    pieces: Vec<ExtNat>,
    points: Vec<ExtNat>,
}

impl StepLsc {
    pub fn constant(v: ExtNat) -> StepLsc {
        StepLsc {
            nodes: vec![Q::zero(), Q::one()],
            pieces: vec![v],
            points: vec![v, v],
        }
    }

    pub fn zero() -> StepLsc {
        Self::constant(Fin(0))
    }

    pub fn one() -> StepLsc {
        Self::constant(Fin(1))
    }

    /// Builds and normalizes; `None` if the data is malformed or not lower
    /// semicontinuous.
    pub fn from_parts(nodes: Vec<Q>, pieces: Vec<ExtNat>, points: Vec<ExtNat>) -> Option<StepLsc> {
        if nodes.len() < 2 || pieces.len() + 1 != nodes.len() || points.len() != nodes.len() {
            return None;
        }
        if nodes[0] != Q::zero() || nodes[nodes.len() - 1] != Q::one() {
            return None;
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        let f = StepLsc { nodes, pieces, points };
        f.is_lsc().then(|| f.normalized())
    }

    fn is_lsc(&self) -> bool {
        (0..self.points.len()).all(|i| {
            let left = i.checked_sub(1).map(|j| self.pieces[j]);
            let right = self.pieces.get(i).copied();
            left.into_iter().chain(right).all(|v| self.points[i] <= v)
        })
    }

    fn normalized(mut self) -> StepLsc {
        let mut i = 1;
        while i + 1 < self.nodes.len() {
            if self.points[i] == self.pieces[i - 1] && self.pieces[i - 1] == self.pieces[i] {
                self.nodes.remove(i);
                self.points.remove(i);
                self.pieces.remove(i);
            } else {
                i += 1;
            }
        }
        self
    }

    /// Indicator of a finite union of intervals.
    pub fn indicator(set: &[Interval]) -> StepLsc {
        let mut nodes = vec![Q::zero(), Q::one()];
        for iv in set.iter().filter(|iv| !iv.is_empty()) {
            nodes.push(iv.lo.clone().max(Q::zero()).min(Q::one()));
            nodes.push(iv.hi.clone().max(Q::zero()).min(Q::one()));
        }
        nodes.sort();
        nodes.dedup();
        let inside = |x: &Q| set.iter().any(|iv| iv.contains(x));
        let mut f = StepLsc {
            pieces: vec![Fin(0); nodes.len() - 1],
            points: vec![Fin(0); nodes.len()],
            nodes,
        };
        for k in 0..f.pieces.len() {
            if inside(&f.piece_sample(k)) {
                f.pieces[k] = Fin(1);
            }
        }
        for k in 0..f.points.len() {
            if inside(&f.nodes[k]) {
                f.points[k] = Fin(1);
            }
        }
        f.normalized()
    }

    /// The chain generator `1_{(t,1]}`; zero when `t >= 1`.
    pub fn upper(t: &Q) -> StepLsc {
        if *t >= Q::one() {
            return StepLsc::zero();
        }
        Self::indicator(&[Interval::open(t.clone(), Q::int(2))])
    }

    pub fn nodes(&self) -> &[Q] {
        &self.nodes
    }

    pub fn pieces(&self) -> &[ExtNat] {
        &self.pieces
    }

    pub fn points(&self) -> &[ExtNat] {
        &self.points
    }

    fn piece_sample(&self, k: usize) -> Q {
        self.nodes[k].mid(&self.nodes[k + 1])
    }

    pub fn eval(&self, x: &Q) -> ExtNat {
        match self.nodes.binary_search(x) {
            Ok(i) => self.points[i],
            Err(i) => self.pieces[i - 1],
        }
    }

    /// Both functions on their common refinement: merged nodes, then piece and
    /// point values of `self` and of `other`.
    fn aligned(&self, other: &StepLsc) -> Aligned {
        let (a, b) = (&self.nodes, &other.nodes);
        let cap = a.len() + b.len();
        let mut out = Aligned {
            nodes: Vec::with_capacity(cap),
            p1: Vec::with_capacity(cap),
            q1: Vec::with_capacity(cap),
            p2: Vec::with_capacity(cap),
            q2: Vec::with_capacity(cap),
        };
        let (mut i, mut j) = (0, 0);
        loop {
            let ord = a[i].cmp(&b[j]);
            let (qa, qb, step_a, step_b) = match ord {
                Ordering::Equal => (self.points[i], other.points[j], true, true),
                Ordering::Less => (self.points[i], other.pieces[j - 1], true, false),
                Ordering::Greater => (self.pieces[i - 1], other.points[j], false, true),
            };
            out.nodes.push(if step_a { a[i].clone() } else { b[j].clone() });
            out.q1.push(qa);
            out.q2.push(qb);
            if i + 1 == a.len() && j + 1 == b.len() {
                break;
            }
            if step_a {
                i += 1;
            }
            if step_b {
                j += 1;
            }
            out.p1.push(self.pieces[i - 1]);
            out.p2.push(other.pieces[j - 1]);
        }
        out
    }

    /// Walks the common refinement, calling `f(on_piece, self value, other value)`
    /// for node, piece, node, …, node; stops at the first `false`.
    fn walk(&self, other: &StepLsc, mut f: impl FnMut(bool, ExtNat, ExtNat) -> bool) -> bool {
        let (a, b) = (&self.nodes, &other.nodes);
        let (mut i, mut j) = (0, 0);
        loop {
            let (qa, qb, step_a, step_b) = match a[i].cmp(&b[j]) {
                Ordering::Equal => (self.points[i], other.points[j], true, true),
                Ordering::Less => (self.points[i], other.pieces[j - 1], true, false),
                Ordering::Greater => (self.pieces[i - 1], other.points[j], false, true),
            };
            if !f(false, qa, qb) {
                return false;
            }
            if i + 1 == a.len() && j + 1 == b.len() {
                return true;
            }
            i += step_a as usize;
            j += step_b as usize;
            if !f(true, self.pieces[i - 1], other.pieces[j - 1]) {
                return false;
            }
        }
    }

    fn zip_with(&self, other: &StepLsc, op: impl Fn(ExtNat, ExtNat) -> ExtNat) -> StepLsc {
        let al = self.aligned(other);
        StepLsc {
            pieces: al.p1.into_iter().zip(al.p2).map(|(a, b)| op(a, b)).collect(),
            points: al.q1.into_iter().zip(al.q2).map(|(a, b)| op(a, b)).collect(),
            nodes: al.nodes,
        }
        .normalized()
    }

    pub fn max_with(&self, other: &StepLsc) -> StepLsc {
        self.zip_with(other, |a, b| a.max(b))
    }

    pub fn sum(&self, other: &StepLsc) -> StepLsc {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: ExtNat) -> StepLsc {
        StepLsc {
            nodes: self.nodes.clone(),
            pieces: self.pieces.iter().map(|v| c * *v).collect(),
            points: self.points.iter().map(|v| c * *v).collect(),
        }
        .normalized()
    }

    pub fn leq(&self, other: &StepLsc) -> bool {
        self.walk(other, |_, a, b| a <= b)
    }

    pub fn is_finite(&self) -> bool {
        self.pieces.iter().chain(&self.points).all(|v| v.is_finite())
    }

    pub fn max_value(&self) -> ExtNat {
        self.pieces.iter().chain(&self.points).copied().max().unwrap_or(Fin(0))
    }

    /// `self ≪ other`: finite, and each closed level set `cl{self ≥ k}` lies in
    /// the open set `{other ≥ k}`.
    pub fn way_below(&self, other: &StepLsc) -> bool {
        if !self.is_finite() {
            return false;
        }
        // each piece of `self` must also sit below the neighbouring node values of `other`
        let (mut last_node, mut piece) = (Fin(0), Fin(0));
        self.walk(other, |on_piece, a, b| {
            if on_piece {
                piece = a;
                a <= b && a <= last_node
            } else {
                last_node = b;
                let ok = a <= b && piece <= b;
                piece = Fin(0);
                ok
            }
        })
    }

    /// Components of `{self ≥ k}`, each relatively open in `[0,1]`.
    pub fn level_set(&self, k: u64) -> Vec<Interval> {
        let mut out = vec![];
        let mut cur: Option<Interval> = None;
        let n = self.nodes.len();
        // walk point_0, piece_0, point_1, …, point_{n-1}
        for idx in 0..(2 * n - 1) {
            let (val, lo, hi, lo_c, hi_c) = if idx % 2 == 0 {
                let b = self.nodes[idx / 2].clone();
                (self.points[idx / 2], b.clone(), b, true, true)
            } else {
                let k = idx / 2;
                (self.pieces[k], self.nodes[k].clone(), self.nodes[k + 1].clone(), false, false)
            };
            if val >= Fin(k) {
                cur = Some(match cur.take() {
                    Some(mut c) => {
                        c.hi = hi;
                        c.hi_closed = hi_c;
                        c
                    }
                    None => Interval { lo, hi, lo_closed: lo_c, hi_closed: hi_c },
                });
            } else if let Some(c) = cur.take() {
                out.push(c);
            }
        }
        out.extend(cur);
        out
    }

    /// Distance from `cl{self ≥ k}` to the complement of `{other ≥ k}`, over all
    /// levels of `self`; `None` when some level set is not enclosed.
    fn margin(&self, other: &StepLsc) -> Option<Q> {
        let top = self.max_value().finite()?;
        let mut best = Q::one();
        for k in 1..=top {
            let outer = other.level_set(k);
            for c in self.level_set(k) {
                let host = outer.iter().find(|o| o.contains(&c.lo) && o.contains(&c.hi))?;
                let left = (host.lo > Q::zero() || !host.lo_closed).then(|| &c.lo - &host.lo);
                let right = (host.hi < Q::one() || !host.hi_closed).then(|| &host.hi - &c.hi);
                for g in left.into_iter().chain(right) {
                    if !g.is_positive() {
                        return None;
                    }
                    best = best.min(g);
                }
            }
        }
        Some(best)
    }

    /// Sum over `k` of indicators of the open `eps`-neighbourhoods of `cl{self ≥ k}`.
    fn fattened(&self, eps: &Q) -> StepLsc {
        let top = self.max_value().finite().unwrap_or(0);
        let mut acc = StepLsc::zero();
        for k in 1..=top {
            let nbhd: Vec<Interval> = self
                .level_set(k)
                .iter()
                .map(|c| Interval::open(&c.lo - eps, &c.hi + eps))
                .collect();
            acc = acc.sum(&StepLsc::indicator(&nbhd));
        }
        acc
    }
}

impl fmt::Debug for StepLsc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.nodes.len() {
            if i > 0 {
                write!(f, "|{}|", self.pieces[i - 1])?;
            }
            write!(f, "{}@{}", self.points[i], self.nodes[i])?;
        }
        Ok(())
    }
}

/// `Lsc([0,1], N̄)` restricted to step functions with rational breakpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LscInterval;

impl LscInterval {
    /// Open intervals with endpoints on the grid of mesh `1/m`.
    pub fn grid_intervals(m: u64) -> Vec<Interval> {
        let pts: Vec<Q> = (0..=m).map(|j| Q::new(j as i64, m as i64)).collect();
        let mut out = vec![];
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                out.push(Interval::open(
                    if a == 0 { Q::int(-1) } else { pts[a].clone() },
                    if b == pts.len() - 1 { Q::int(2) } else { pts[b].clone() },
                ));
            }
        }
        out
    }

    /// `F_n` restricted to `{0,1}`-valued functions: constant on each open cell
    /// of the equidistant partition of mesh `1/n`.
    pub fn grid_family(n: u64) -> Vec<StepLsc> {
        let nodes: Vec<Q> = (0..=n).map(|j| Q::new(j as i64, n as i64)).collect();
        let mut out = vec![];
        for mask in 0u64..(1 << n) {
            let pieces: Vec<ExtNat> = (0..n).map(|j| Fin((mask >> j) & 1)).collect();
            // a cell's closure meets its end nodes; end nodes 0 and 1 follow their cell
            let mut points = vec![Fin(0); nodes.len()];
            points[0] = pieces[0];
            points[n as usize] = pieces[n as usize - 1];
            let free: Vec<usize> = (1..n as usize)
                .filter(|&i| pieces[i - 1] == Fin(1) && pieces[i] == Fin(1))
                .collect();
            for pm in 0u64..(1 << free.len()) {
                for (bit, &i) in free.iter().enumerate() {
                    points[i] = Fin((pm >> bit) & 1);
                }
                out.push(StepLsc::from_parts(nodes.clone(), pieces.clone(), points.clone()).unwrap());
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl CuSemigroup for LscInterval {
    type Elem = StepLsc;

    fn name(&self) -> String {
        "Lsc[0,1]".into()
    }

    fn zero(&self) -> StepLsc {
        StepLsc::zero()
    }

    fn add(&self, a: &StepLsc, b: &StepLsc) -> StepLsc {
        a.sum(b)
    }

    fn leq(&self, a: &StepLsc, b: &StepLsc) -> bool {
        a.leq(b)
    }

    fn way_below(&self, a: &StepLsc, b: &StepLsc) -> bool {
        a.way_below(b)
    }

    /// `0` and `c·1_I` for open intervals `I` on the grid of mesh `2^-depth`,
    /// `1 <= c <= min(depth, 2)`.
    fn basis(&self, depth: usize) -> Vec<StepLsc> {
        let m = 1u64 << depth;
        let cmax = depth.clamp(1, 2) as u64;
        let mut out = vec![StepLsc::zero()];
        for iv in Self::grid_intervals(m) {
            let ind = StepLsc::indicator(&[iv]);
            for c in 1..=cmax {
                out.push(ind.scale(Fin(c)));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn interpolate(&self, lo: &StepLsc, hi: &StepLsc) -> Option<StepLsc> {
        if !lo.way_below(hi) {
            return None;
        }
        let margin = lo.margin(hi)?;
        Some(lo.fattened(&(margin / Q::int(2))))
    }

    fn inf_multiple(&self, x: &StepLsc) -> StepLsc {
        x.scale(Inf)
    }

    fn encode(&self, x: &StepLsc) -> String {
        format!("{x:?}")
    }
}
