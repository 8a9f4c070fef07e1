//! Paths `G → S` (elements of the Thomsen semigroup), the shift metric `d_G`,
//! its supremum `d_Λ` over a family of paths, and the bridges between `d_Λ`
//! and finite-set comparison.
//!
//! Every path type decides `∀t: u(t + r) ≤ w(t)` exactly for a given shift
//! `r` and lists finitely many shifts containing the infimum of the good ones.
//! `d_G` then binary-searches that list, so all values are exact rationals.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check_same, CuError, Result};
use crate::hom::Hom;
use crate::instances::softdim::{Compact, Soft};
use crate::instances::{Dim, Fin, GElem, GeneratorG, Interval, LscInterval, SoftDim, StepLsc};
use crate::limit::{cauchy_limit, converges_to, CauchyLimit, Enumeration, MorphismSequence};
use crate::pl::PlMap;
use crate::rational::Q;
use crate::semigroup::{compare_maps, CuSemigroup, FiniteSubset};

type Elem<P> = <<P as CuPath>::Target as CuSemigroup>::Elem;

/// A finitely presented Cu-morphism `τ: G → S`, read through `y_t = τ(1_{(t,1]})`.
pub trait CuPath: Clone + Send + Sync + fmt::Debug {
    type Target: CuSemigroup + 'static;

    fn target(&self) -> Arc<Self::Target>;

    /// `y_t` for `0 <= t < 1`.
    fn at(&self, t: &Q) -> Elem<Self>;

    /// `y_t`, with `y_t = 0` once `t >= 1`.
    fn value(&self, t: &Q) -> Elem<Self> {
        if *t >= Q::one() {
            self.target().zero()
        } else {
            self.at(t)
        }
    }

    /// Parameters where the path changes shape.
    fn nodes(&self) -> Vec<Q>;

    /// Shifts containing `inf { r : ∀t, self(t + r) ≤ other(t) }`.
    fn shift_candidates(&self, other: &Self) -> Vec<Q>;

    /// Exact test of `∀t ∈ [0,1]: self(t + r) ≤ other(t)`.
    fn dominated_after(&self, other: &Self, r: &Q) -> bool;
}

/// `d_G(u, w)`: the least shift `r` with `u(t + r) ≤ w(t)` and `w(t + r) ≤ u(t)` for all `t`.
pub fn d_g<P: CuPath>(u: &P, w: &P) -> Result<Q> {
    check_same(&u.target().name(), &w.target().name())?;
    let good = |r: &Q| u.dominated_after(w, r) && w.dominated_after(u, r);
    let mut c: Vec<Q> = u
        .shift_candidates(w)
        .into_iter()
        .chain(w.shift_candidates(u))
        .filter(|r| !r.is_negative() && *r < Q::one())
        .collect();
    c.push(Q::zero());
    c.push(Q::one());
    c.sort();
    c.dedup();
    // goodness is upward closed and the infimum is one of the candidates, so
    // the answer is the first candidate whose right neighbourhood is good
    let probe = |i: usize| if i + 1 < c.len() { c[i].mid(&c[i + 1]) } else { c[i].clone() };
    let (mut lo, mut hi) = (0, c.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if good(&probe(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(c[lo].clone())
}

fn sorted(mut v: Vec<Q>) -> Vec<Q> {
    v.sort();
    v.dedup();
    v
}

fn in_unit(t: &Q) -> bool {
    !t.is_negative() && *t <= Q::one()
}

// ---------------------------------------------------------------------------
// step paths

/// A path with compact values, constant on `[t_j, t_{j+1})` and zero from `1` on.
pub struct StepPath<S: CuSemigroup> {
    target: Arc<S>,
    breaks: Vec<Q>,
    values: Vec<S::Elem>,
}

impl<S: CuSemigroup> Clone for StepPath<S> {
    fn clone(&self) -> Self {
        StepPath {
            target: self.target.clone(),
            breaks: self.breaks.clone(),
            values: self.values.clone(),
        }
    }
}

impl<S: CuSemigroup> fmt::Debug for StepPath<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .breaks
            .iter()
            .zip(&self.values)
            .map(|(t, v)| format!("{t}:{}", self.target.encode(v)))
            .collect();
        write!(f, "Step[{}]", parts.join(", "))
    }
}

impl<S: CuSemigroup + 'static> StepPath<S> {
    pub fn new(target: Arc<S>, breaks: Vec<Q>, values: Vec<S::Elem>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != values.len() || !breaks[0].is_zero() {
            return Err(CuError::InvalidParameter("step path needs breaks starting at 0, one value each".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) || breaks[breaks.len() - 1] >= Q::one() {
            return Err(CuError::InvalidParameter("breaks must increase inside [0,1)".into()));
        }
        if let Some(v) = values.iter().find(|v| !target.is_compact(v)) {
            return Err(CuError::Representation(format!(
                "{} is not compact; use a level path",
                target.encode(v)
            )));
        }
        if values.windows(2).any(|w| !target.leq(&w[1], &w[0])) {
            return Err(CuError::Precondition("step path values must decrease".into()));
        }
        Ok(Self::merged(target, breaks, values))
    }

    fn merged(target: Arc<S>, breaks: Vec<Q>, values: Vec<S::Elem>) -> Self {
        let mut b = vec![];
        let mut v: Vec<S::Elem> = vec![];
        for (t, x) in breaks.into_iter().zip(values) {
            if v.last() != Some(&x) {
                b.push(t);
                v.push(x);
            }
        }
        StepPath { target, breaks: b, values: v }
    }

    pub fn breaks(&self) -> &[Q] {
        &self.breaks
    }

    pub fn values(&self) -> &[S::Elem] {
        &self.values
    }

    /// Applies a morphism of the target pointwise.
    pub fn then<T: CuSemigroup + 'static>(&self, alpha: &Hom<S, T>) -> StepPath<T> {
        let values = self.values.iter().map(|x| alpha.apply(x)).collect();
        StepPath::merged(alpha.cod().clone(), self.breaks.clone(), values)
    }
}

/// The path with `y_{1/n} = x_n` for `n >= 2`, constant on `[1/n, 1/(n-1))`
/// and equal to the last term near `0`. The value at `t = 1` is always `0`,
/// so `x_1` only enters through `x_1 ≪ x_2`.
pub fn path_from_chain<S: CuSemigroup + 'static>(target: Arc<S>, chain: &[S::Elem]) -> Result<StepPath<S>> {
    if chain.len() < 2 {
        return Err(CuError::Precondition("a chain needs at least two terms".into()));
    }
    if let Some(w) = chain.windows(2).find(|w| !target.way_below(&w[0], &w[1])) {
        return Err(CuError::Precondition(format!(
            "{} ≪ {} fails",
            target.encode(&w[0]),
            target.encode(&w[1])
        )));
    }
    let n = chain.len() as i64;
    let mut breaks = vec![Q::zero()];
    let mut values = vec![chain[chain.len() - 1].clone()];
    for k in (2..n).rev() {
        breaks.push(Q::new(1, k));
        values.push(chain[k as usize - 1].clone());
    }
    StepPath::new(target, breaks, values)
}

impl<S: CuSemigroup + 'static> CuPath for StepPath<S> {
    type Target = S;

    fn target(&self) -> Arc<S> {
        self.target.clone()
    }

    fn at(&self, t: &Q) -> S::Elem {
        let j = match self.breaks.binary_search(t) {
            Ok(j) => j,
            Err(j) => j - 1,
        };
        self.values[j].clone()
    }

    fn nodes(&self) -> Vec<Q> {
        self.breaks.clone()
    }

    fn shift_candidates(&self, other: &Self) -> Vec<Q> {
        let mine: Vec<Q> = self.breaks.iter().cloned().chain([Q::one()]).collect();
        let mut out = vec![];
        for b in &mine {
            for c in &other.breaks {
                if b > c {
                    out.push(b - c);
                }
            }
        }
        out
    }

    fn dominated_after(&self, other: &Self, r: &Q) -> bool {
        // both sides are constant between these points, pieces closed on the left
        let mut ts: Vec<Q> = other.breaks.clone();
        ts.extend(self.breaks.iter().chain([&Q::one()]).map(|b| b - r).filter(in_unit));
        ts.push(Q::one());
        sorted(ts)
            .iter()
            .all(|t| self.target.leq(&self.value(&(t + r)), &other.value(t)))
    }
}

// ---------------------------------------------------------------------------
// level paths: an increasing PL level on [0,1) that jumps to `top` at 1

struct Level {
    f: PlMap,
    top: Q,
}

impl Level {
    fn at(&self, s: &Q) -> Q {
        if *s >= Q::one() {
            self.top.clone()
        } else {
            self.f.eval(s)
        }
    }

    /// `min { s : level(s) >= v }`, the jump at `1` included.
    fn lower_inverse(&self, v: &Q) -> Q {
        if self.f.eval(&Q::zero()) >= *v {
            return Q::zero();
        }
        if self.f.eval(&Q::one()) < *v {
            return Q::one();
        }
        self.f.preimage_points(v).into_iter().min().unwrap_or_else(Q::one)
    }

    /// `sup { s < 1 : level(s) <= v }`.
    fn upper_inverse(&self, v: &Q) -> Option<Q> {
        if self.f.eval(&Q::zero()) > *v {
            return None;
        }
        if self.f.eval(&Q::one()) <= *v {
            return Some(Q::one());
        }
        self.f.preimage_points(v).into_iter().max()
    }

    /// Candidate shifts for `∀t: a(t + r) ⊒ b(t)`: the one-sided limits of
    /// `a^{-1}(b(t)) - t` at breakpoints of `b` and at points where `b` meets
    /// a breakpoint value of `a`.
    fn candidates(a: &Level, b: &Level) -> Vec<Q> {
        let mut ts: Vec<Q> = b.f.breaks().to_vec();
        for s in a.f.breaks() {
            ts.extend(b.f.preimage_points(&a.f.eval(s)));
        }
        let mut out = vec![];
        for t in sorted(ts).iter().filter(|t| **t < Q::one()) {
            let v = b.f.eval(t);
            out.push(a.lower_inverse(&v) - t);
            if let Some(s) = a.upper_inverse(&v) {
                out.push(s - t);
            }
            out.push(Q::one() - t);
        }
        out
    }

    /// `∀t ∈ [0,1]: a(t + r) ⊒ b(t)`, where `⊒` is `>=`, or `>` below `top`
    /// when `strict`. Checked at all vertices, with the left limit at `1 - r`.
    fn dominates(a: &Level, b: &Level, r: &Q, strict: bool) -> bool {
        let ok = |x: &Q, y: &Q| if strict { x > y || *x == a.top } else { x >= y };
        let mut ts: Vec<Q> = vec![Q::zero(), Q::one()];
        ts.extend(b.f.breaks().iter().cloned());
        ts.extend(a.f.breaks().iter().map(|s| s - r).filter(in_unit));
        let edge = Q::one() - r;
        if in_unit(&edge) {
            ts.push(edge.clone());
        }
        let b_at = |t: &Q| if *t >= Q::one() { b.top.clone() } else { b.f.eval(t) };
        sorted(ts).iter().all(|t| {
            let here = ok(&a.at(&(t + r)), &b_at(t));
            let left = *t != edge || t.is_zero() || ok(&a.f.eval(&Q::one()), &b.f.eval(t));
            here && left
        })
    }
}

fn check_increasing(f: &PlMap, cap: &Q) -> Result<()> {
    let v = f.values();
    for i in 0..v.len() - 1 {
        if v[i + 1] < v[i] || (v[i + 1] == v[i] && v[i] < *cap) {
            return Err(CuError::Precondition(format!("{f:?} must increase strictly below {cap}")));
        }
    }
    Ok(())
}

fn negate(f: &PlMap) -> PlMap {
    PlMap::new(f.breaks().to_vec(), f.values().iter().map(|v| -v.clone()).collect())
        .expect("same breakpoints")
}

/// A path in `G` of the form `t ↦ 1_{(a(t),1]}` for an increasing PL level `a`;
/// levels at or above `1` give `0`.
#[derive(Clone, PartialEq, Eq)]
pub struct ChainPath {
    level: PlMap,
}

impl fmt::Debug for ChainPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chain{:?}", self.level)
    }
}

impl ChainPath {
    pub fn new(level: PlMap) -> Result<ChainPath> {
        if level.min_value().is_negative() {
            return Err(CuError::Precondition("chain levels must be nonnegative".into()));
        }
        let level = level.capped(&Q::one());
        check_increasing(&level, &Q::one())?;
        Ok(ChainPath { level })
    }

    /// The inclusion `G ⊆ G`: `y_t = 1_{(t,1]}`.
    pub fn identity() -> ChainPath {
        ChainPath { level: PlMap::identity() }
    }

    pub fn level(&self) -> &PlMap {
        &self.level
    }

    fn as_level(&self) -> Level {
        Level { f: self.level.clone(), top: Q::one() }
    }
}

impl CuPath for ChainPath {
    type Target = GeneratorG;

    fn target(&self) -> Arc<GeneratorG> {
        Arc::new(GeneratorG)
    }

    fn at(&self, t: &Q) -> GElem {
        GElem::chain(&self.level.eval(t))
    }

    fn nodes(&self) -> Vec<Q> {
        self.level.breaks().to_vec()
    }

    fn shift_candidates(&self, other: &Self) -> Vec<Q> {
        Level::candidates(&self.as_level(), &other.as_level())
    }

    fn dominated_after(&self, other: &Self, r: &Q) -> bool {
        // 1_{(a,1]} ≤ 1_{(b,1]} iff a >= b once both are capped at 1
        Level::dominates(&self.as_level(), &other.as_level(), r, false)
    }
}

/// A Cu-morphism `G → G` of the form `1_{(t,1]} ↦ 1_{(φ(t),1]}`.
#[derive(Clone, PartialEq, Eq)]
pub struct ChainMap {
    phi: PlMap,
}

impl fmt::Debug for ChainMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChainMap{:?}", self.phi)
    }
}

impl ChainMap {
    pub fn new(phi: PlMap) -> Result<ChainMap> {
        if phi.min_value().is_negative() || phi.eval(&Q::one()) < Q::one() {
            return Err(CuError::Precondition("φ must be nonnegative with φ(1) >= 1".into()));
        }
        check_increasing(&phi.capped(&Q::one()), &Q::one())?;
        Ok(ChainMap { phi })
    }

    pub fn identity() -> ChainMap {
        ChainMap { phi: PlMap::identity() }
    }

    /// `1_{(t,1]} ↦ 1_{(t+s,1]}`.
    pub fn shift(s: &Q) -> ChainMap {
        ChainMap { phi: PlMap::identity().shifted(s) }
    }

    pub fn phi(&self) -> &PlMap {
        &self.phi
    }

    fn map_level(&self, t: &Q) -> Q {
        self.phi.eval(&t.clone().min(Q::one()))
    }

    pub fn apply(&self, x: &GElem) -> GElem {
        let levels = x.levels().iter().map(|t| self.map_level(t)).collect();
        GElem::from_levels(levels, x.inf_from().map(|t| self.map_level(t)))
    }

    pub fn to_hom(&self) -> Hom<GeneratorG, GeneratorG> {
        let me = self.clone();
        Hom::new(Arc::new(GeneratorG), Arc::new(GeneratorG), format!("{self:?}"), move |x| me.apply(x))
    }
}

/// A path in `S_p` of the form `t ↦ a(t)` for a decreasing PL magnitude `a`,
/// soft when `a` moves; compact paths have constant magnitude.
#[derive(Clone, PartialEq, Eq)]
pub struct RayPath {
    p: u64,
    magnitude: PlMap,
    compact: bool,
}

impl fmt::Debug for RayPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", if self.compact { "CompactRay" } else { "Ray" }, self.magnitude)
    }
}

impl RayPath {
    /// `t ↦ a(t)` in the soft part of `S_p`.
    pub fn soft(p: u64, magnitude: PlMap) -> Result<RayPath> {
        SoftDim::new(p)?;
        if magnitude.min_value().is_negative() {
            return Err(CuError::Precondition("magnitudes must be nonnegative".into()));
        }
        check_increasing(&negate(&magnitude), &Q::zero())?;
        Ok(RayPath { p, magnitude, compact: false })
    }

    /// The constant path at the compact element `c` (zero only at `t = 1`).
    pub fn compact(p: u64, c: Q) -> Result<RayPath> {
        let s = SoftDim::new(p)?;
        s.compact(c.clone())?;
        Ok(RayPath { p, magnitude: PlMap::constant(c), compact: true })
    }

    /// The path `t ↦ c·(1 - t)` on the soft ray.
    pub fn affine(p: u64, c: Q) -> Result<RayPath> {
        RayPath::soft(p, PlMap::new(vec![Q::zero(), Q::one()], vec![c, Q::zero()])?)
    }

    pub fn magnitude(&self) -> &PlMap {
        &self.magnitude
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    fn as_level(&self) -> Level {
        Level { f: negate(&self.magnitude), top: Q::zero() }
    }
}

impl CuPath for RayPath {
    type Target = SoftDim;

    fn target(&self) -> Arc<SoftDim> {
        Arc::new(SoftDim::new(self.p).expect("checked on construction"))
    }

    fn at(&self, t: &Q) -> Dim {
        let v = self.magnitude.eval(t);
        if v.is_zero() || self.compact {
            Compact(v)
        } else {
            Soft(v)
        }
    }

    fn nodes(&self) -> Vec<Q> {
        self.magnitude.breaks().to_vec()
    }

    fn shift_candidates(&self, other: &Self) -> Vec<Q> {
        Level::candidates(&self.as_level(), &other.as_level())
    }

    fn dominated_after(&self, other: &Self, r: &Q) -> bool {
        // a compact value sits strictly above the soft value of equal size
        let strict = self.compact && !other.compact;
        Level::dominates(&self.as_level(), &other.as_level(), r, strict)
    }
}

/// Multiplication by a positive `p`-adic rational on `S_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoftScale {
    pub p: u64,
    pub factor: Q,
}

impl SoftScale {
    pub fn new(p: u64, factor: Q) -> Result<SoftScale> {
        SoftDim::new(p)?;
        if !factor.is_positive() || !factor.is_p_adic(p) {
            return Err(CuError::InvalidParameter(format!("{factor} is not a positive element of N[1/{p}]")));
        }
        Ok(SoftScale { p, factor })
    }

    pub fn apply(&self, x: &Dim) -> Dim {
        match x {
            Compact(v) => Compact(v * &self.factor),
            Soft(v) => Soft(v * &self.factor),
            other => other.clone(),
        }
    }

    pub fn to_hom(&self) -> Hom<SoftDim, SoftDim> {
        let s = Arc::new(SoftDim::new(self.p).expect("checked on construction"));
        let me = self.clone();
        Hom::new(s.clone(), s, format!("x{}", self.factor), move |x| me.apply(x))
    }
}

// ---------------------------------------------------------------------------
// ball paths on Lsc([0,1], N̄)

/// The path `t ↦ 1_{h^{-1}(B(x, 1-t))}`: the ball path at `x` followed by the
/// morphism `f ↦ f ∘ h`.
#[derive(Clone, PartialEq, Eq)]
pub struct BallPath {
    center: Q,
    h: PlMap,
}

impl fmt::Debug for BallPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ball({}; {:?})", self.center, self.h)
    }
}

impl BallPath {
    pub fn new(center: Q) -> Result<BallPath> {
        if !in_unit(&center) {
            return Err(CuError::InvalidParameter(format!("center {center} is outside [0,1]")));
        }
        Ok(BallPath { center, h: PlMap::identity() })
    }

    pub fn center(&self) -> &Q {
        &self.center
    }

    pub fn map(&self) -> &PlMap {
        &self.h
    }

    pub fn pulled_back(&self, g: &PlMap) -> Result<BallPath> {
        if !g.maps_into_unit() {
            return Err(CuError::Precondition(format!("{g:?} leaves [0,1]")));
        }
        Ok(BallPath { center: self.center.clone(), h: self.h.compose(g) })
    }

    fn ball(&self, radius: &Q) -> StepLsc {
        StepLsc::indicator(&[Interval::open(&self.center - radius, &self.center + radius)])
    }

    /// `max_y (|other.h(y) - x| - |self.h(y) - x|)`.
    fn excess(&self, other: &BallPath) -> Q {
        let x = &self.center;
        let mut ys: Vec<Q> = self.h.breaks().to_vec();
        ys.extend(other.h.breaks().iter().cloned());
        ys.extend(self.h.preimage_points(x));
        ys.extend(other.h.preimage_points(x));
        sorted(ys)
            .iter()
            .map(|y| (other.h.eval(y) - x).abs() - (self.h.eval(y) - x).abs())
            .max()
            .expect("nonempty")
    }
}

impl CuPath for BallPath {
    type Target = LscInterval;

    fn target(&self) -> Arc<LscInterval> {
        Arc::new(LscInterval)
    }

    fn at(&self, t: &Q) -> StepLsc {
        self.h.pull_back(&self.ball(&(Q::one() - t)))
    }

    fn nodes(&self) -> Vec<Q> {
        vec![Q::zero()]
    }

    fn shift_candidates(&self, other: &Self) -> Vec<Q> {
        vec![self.excess(other)]
    }

    /// `u(t+r) ≤ w(t)` fails exactly when some `y` has `D_u(y) + r < D_w(y)`,
    /// with `D(y)` the distance from the image of `y` to the center.
    fn dominated_after(&self, other: &Self, r: &Q) -> bool {
        self.center == other.center && self.excess(other) <= *r
    }
}

// ---------------------------------------------------------------------------
// morphisms acting on paths

/// A morphism representation that can be composed after a path.
pub trait PathMap<P: CuPath>: Send + Sync {
    type Out: CuPath;

    fn push(&self, p: &P) -> Self::Out;

    fn to_hom(&self) -> Hom<P::Target, <Self::Out as CuPath>::Target>;
}

impl<S: CuSemigroup + 'static, T: CuSemigroup + 'static> PathMap<StepPath<S>> for Hom<S, T> {
    type Out = StepPath<T>;

    fn push(&self, p: &StepPath<S>) -> StepPath<T> {
        p.then(self)
    }

    fn to_hom(&self) -> Hom<S, T> {
        self.clone()
    }
}

impl PathMap<ChainPath> for ChainMap {
    type Out = ChainPath;

    fn push(&self, p: &ChainPath) -> ChainPath {
        let level = self.phi.compose(&p.level).capped(&Q::one());
        ChainPath { level }
    }

    fn to_hom(&self) -> Hom<GeneratorG, GeneratorG> {
        ChainMap::to_hom(self)
    }
}

impl PathMap<RayPath> for SoftScale {
    type Out = RayPath;

    fn push(&self, p: &RayPath) -> RayPath {
        let magnitude = PlMap::new(
            p.magnitude.breaks().to_vec(),
            p.magnitude.values().iter().map(|v| v * &self.factor).collect(),
        )
        .expect("same breakpoints");
        RayPath { p: p.p, magnitude, compact: p.compact }
    }

    fn to_hom(&self) -> Hom<SoftDim, SoftDim> {
        SoftScale::to_hom(self)
    }
}

/// The morphism `f ↦ f ∘ h` of `Lsc([0,1], N̄)`.
impl PathMap<BallPath> for PlMap {
    type Out = BallPath;

    fn push(&self, p: &BallPath) -> BallPath {
        BallPath { center: p.center.clone(), h: p.h.compose(self) }
    }

    fn to_hom(&self) -> Hom<LscInterval, LscInterval> {
        crate::pl::pl_induced_morphism(self).expect("maps into [0,1]")
    }
}

// ---------------------------------------------------------------------------
// generating families and d_Λ

/// Terms `(τ_i, t_i)` with `lo ≪ Σ τ_i(1_{(t_i + r,1]})` and `Σ τ_i(1_{(t_i,1]}) ≪ hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Squeeze<E> {
    pub lo: E,
    pub hi: E,
    pub terms: Vec<(usize, Q)>,
    pub margin: Q,
}

type Finder<P> = Arc<dyn Fn(&[P], &Elem<P>, &Elem<P>) -> Option<Vec<(usize, Q)>> + Send + Sync>;

/// A finite list of paths into a common target, optionally a truncation of an
/// infinite family, with a search for generating-image certificates.
#[derive(Clone)]
pub struct GeneratingFamily<P: CuPath> {
    pub paths: Vec<P>,
    /// Size of the untruncated family, when it is infinite.
    pub truncation: Option<usize>,
    finder: Option<Finder<P>>,
}

impl<P: CuPath> fmt::Debug for GeneratingFamily<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratingFamily")
            .field("paths", &self.paths)
            .field("truncation", &self.truncation)
            .finish()
    }
}

const MAX_MARGIN_HALVINGS: i64 = 24;

impl<P: CuPath + 'static> GeneratingFamily<P> {
    pub fn new(paths: Vec<P>) -> Result<Self> {
        if paths.is_empty() {
            return Err(CuError::InvalidParameter("empty family".into()));
        }
        let name = paths[0].target().name();
        for p in &paths {
            check_same(&name, &p.target().name())?;
        }
        Ok(GeneratingFamily { paths, truncation: None, finder: None })
    }

    pub fn truncated(mut self, at: usize) -> Self {
        self.truncation = Some(at);
        self
    }

    pub fn with_finder(
        mut self,
        f: impl Fn(&[P], &Elem<P>, &Elem<P>) -> Option<Vec<(usize, Q)>> + Send + Sync + 'static,
    ) -> Self {
        self.finder = Some(Arc::new(f));
        self
    }

    pub fn target(&self) -> Arc<P::Target> {
        self.paths[0].target()
    }

    fn sum_at(&self, terms: &[(usize, Q)], shift: &Q) -> Elem<P> {
        let s = self.target();
        terms
            .iter()
            .fold(s.zero(), |acc, (i, t)| s.add(&acc, &self.paths[*i].value(&(t + shift))))
    }

    fn margin(&self, lo: &Elem<P>, hi: &Elem<P>, terms: &[(usize, Q)]) -> Option<Q> {
        let s = self.target();
        if !s.way_below(&self.sum_at(terms, &Q::zero()), hi) {
            return None;
        }
        (0..=MAX_MARGIN_HALVINGS)
            .map(|k| Q::new(1, 1i64 << k))
            .find(|r| s.way_below(lo, &self.sum_at(terms, r)))
    }

    fn sample_points(&self, i: usize) -> Vec<Q> {
        let nodes = self.paths[i].nodes();
        let mut ts: Vec<Q> = (0..32).map(|k| Q::new(k, 32)).collect();
        ts.extend(nodes.windows(2).map(|w| w[0].mid(&w[1])));
        ts.extend(nodes);
        sorted(ts.into_iter().filter(|t| *t < Q::one()).collect())
    }

    fn search(&self, lo: &Elem<P>, hi: &Elem<P>) -> Option<Vec<(usize, Q)>> {
        let s = self.target();
        if s.way_below(lo, &s.zero()) {
            return Some(vec![]);
        }
        if let Some(f) = &self.finder {
            return f(&self.paths, lo, hi);
        }
        let single: Vec<(usize, Q)> = (0..self.paths.len())
            .flat_map(|i| self.sample_points(i).into_iter().map(move |t| (i, t)))
            .collect();
        let fits = |terms: &[(usize, Q)]| self.margin(lo, hi, terms).is_some();
        if let Some(t) = single.iter().find(|t| fits(std::slice::from_ref(*t))) {
            return Some(vec![t.clone()]);
        }
        // keep only terms that fit below `hi` on their own
        let below: Vec<&(usize, Q)> = single
            .iter()
            .filter(|(i, t)| s.way_below(&self.paths[*i].value(t), hi))
            .collect();
        for (a, x) in below.iter().enumerate() {
            for y in &below[a..] {
                let terms = [(*x).clone(), (*y).clone()];
                if fits(&terms) {
                    return Some(terms.to_vec());
                }
            }
        }
        None
    }

    /// A certificate `lo ≪ Σ τ_i(1_{(t_i + r,1]}) ≤ Σ τ_i(1_{(t_i,1]}) ≪ hi`.
    pub fn squeeze(&self, lo: &Elem<P>, hi: &Elem<P>) -> Option<Squeeze<Elem<P>>> {
        let terms = self.search(lo, hi)?;
        let margin = if terms.is_empty() { Q::one() } else { self.margin(lo, hi, &terms)? };
        Some(Squeeze { lo: lo.clone(), hi: hi.clone(), terms, margin })
    }
}

/// `d_Λ(α, β)` with the maximizing path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaDistance {
    pub value: Q,
    pub argmax: usize,
    /// Echo of the family's truncation: the value is then a lower bound.
    pub truncation: Option<usize>,
}

/// `d_Λ(α, β) = max_{τ ∈ Λ} d_G(α∘τ, β∘τ)`.
pub fn d_lambda<P, M>(alpha: &M, beta: &M, family: &GeneratingFamily<P>) -> Result<LambdaDistance>
where
    P: CuPath + 'static,
    M: PathMap<P>,
{
    let vals: Vec<Q> = family
        .paths
        .par_iter()
        .map(|p| d_g(&alpha.push(p), &beta.push(p)))
        .collect::<Result<_>>()?;
    // first maximum, for a deterministic witness
    let (argmax, value) = vals
        .into_iter()
        .enumerate()
        .fold((0, Q::zero()), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(LambdaDistance { value, argmax, truncation: family.truncation })
}

// ---------------------------------------------------------------------------
// bridges

/// `ε_F`: if `d_Λ(α, β) < ε_F` then `α ≃_F β`.
#[derive(Debug, Clone)]
pub struct BridgeEps<E> {
    pub eps: Q,
    pub certificates: Vec<Squeeze<E>>,
}

pub fn bridge_eps_for_set<P: CuPath + 'static>(
    f: &FiniteSubset<Elem<P>>,
    family: &GeneratingFamily<P>,
) -> Result<BridgeEps<Elem<P>>> {
    check_same(&family.target().name(), &f.host)?;
    let certificates: Vec<Squeeze<Elem<P>>> = f
        .ll_pairs()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(lo, hi)| {
            family.squeeze(lo, hi).ok_or_else(|| {
                CuError::MissingCertificate(format!("no squeeze between {lo:?} and {hi:?}"))
            })
        })
        .collect::<Result<_>>()?;
    let eps = certificates.iter().map(|c| c.margin.clone()).min().unwrap_or_else(Q::one);
    Ok(BridgeEps { eps, certificates })
}

/// `F_ε = { τ(1_{(t_i,1]}), τ(1_{(t_i + ε/2,1]}) }` over a partition of mesh `< ε/2`:
/// if `α ≃_{F_ε} β` then `d_Λ(α, β) < ε`.
pub fn bridge_set_for_eps<P: CuPath + 'static>(
    eps: &Q,
    family: &GeneratingFamily<P>,
) -> Result<FiniteSubset<Elem<P>>> {
    if !eps.is_positive() {
        return Err(CuError::InvalidParameter("ε must be positive".into()));
    }
    if family.truncation.is_some() {
        return Err(CuError::Precondition("the set F_ε needs a finite family".into()));
    }
    let half = eps / &Q::int(2);
    let n = (Q::int(2) / eps).floor() + Q::one();
    let n: i64 = n.to_string().parse().map_err(|_| CuError::InvalidParameter("ε too small".into()))?;
    let mut elems = vec![];
    for p in &family.paths {
        for i in 0..=n {
            let t = Q::new(i, n);
            elems.push(p.value(&t));
            elems.push(p.value(&(&t + &half)));
        }
    }
    Ok(FiniteSubset::new(family.target().as_ref(), elems))
}

// ---------------------------------------------------------------------------
// limits

/// Where the `≃_F` modulus of a metric limit came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusSource {
    /// Tail sums of consecutive distances fell below `ε_F` for every basis set.
    Metric,
    /// Some basis set had no metric index inside the stretch; comparisons were used.
    Comparison,
}

pub struct MetricLimit<S: CuSemigroup, T: CuSemigroup> {
    pub limit: Arc<CauchyLimit<S, T>>,
    /// `d_Λ(α_i, α_{i+1})`.
    pub steps: Vec<Q>,
    pub source: ModulusSource,
    /// `d_Λ(α_i, γ)` for a supplied closed form `γ`.
    pub to_candidate: Option<Vec<Q>>,
    /// Whether the limit compares with the closed form on every depth basis set
    /// and the sequence converges to it there.
    pub candidate_agrees: Option<bool>,
}

impl<S: CuSemigroup, T: CuSemigroup> MetricLimit<S, T> {
    /// `d_Λ(α_i, γ)` reached `0` or kept halving within the stretch.
    pub fn metric_converges(&self) -> Option<bool> {
        let d = self.to_candidate.as_ref()?;
        let last = d.last()?;
        Some(last.is_zero() || last.clone() * Q::int(2) <= d[d.len() / 2])
    }
}

/// Limit of a sequence whose consecutive `d_Λ` distances are summable on the
/// stretch, via `ε_F` of each basis set.
pub fn d_lambda_cauchy_limit<P, M>(
    maps: Vec<M>,
    family: &GeneratingFamily<P>,
    depth: usize,
    enumeration: Enumeration,
    candidate: Option<&M>,
) -> Result<MetricLimit<P::Target, <M::Out as CuPath>::Target>>
where
    P: CuPath + 'static,
    M: PathMap<P>,
{
    let steps: Vec<Q> = maps
        .windows(2)
        .map(|w| d_lambda(&w[0], &w[1], family).map(|d| d.value))
        .collect::<Result<_>>()?;
    // tails[i] = Σ_{j >= i} steps[j]
    let mut tails = vec![Q::zero(); maps.len()];
    for i in (0..steps.len()).rev() {
        tails[i] = &tails[i + 1] + &steps[i];
    }
    let dom = maps[0].to_hom().dom().clone();
    let mut metric_ok = true;
    let mut indices = vec![];
    for n in 0..=depth {
        let b = FiniteSubset::basis(dom.as_ref(), enumeration.depth_of(n));
        let eps = bridge_eps_for_set(&b, family)?.eps;
        match tails.iter().position(|t| *t < eps) {
            Some(i) if i <= maps.len() / 2 => indices.push((b, i)),
            _ => metric_ok = false,
        }
    }
    let mut seq = MorphismSequence::new(maps.iter().map(|m| m.to_hom()).collect())?;
    if metric_ok {
        let table = indices;
        seq = seq.with_modulus(move |f| {
            table.iter().find(|(b, _)| b == f).map(|(_, i)| *i).unwrap_or(usize::MAX)
        });
    }
    let limit = Arc::new(cauchy_limit(&seq, depth, enumeration)?);
    let (to_candidate, candidate_agrees) = match candidate {
        Some(c) => {
            let d: Vec<Q> = maps
                .iter()
                .map(|m| d_lambda(m, c, family).map(|d| d.value))
                .collect::<Result<_>>()?;
            let ch = c.to_hom();
            let lim = limit.clone();
            let agrees = (0..=depth).all(|n| {
                let b = FiniteSubset::basis(dom.as_ref(), enumeration.depth_of(n));
                compare_maps(ch.cod().as_ref(), |x| lim.eval(x), |x| ch.apply(x), &b)
                    && converges_to(&seq, &ch, &b).is_some()
            });
            (Some(d), Some(agrees))
        }
        None => (None, None),
    };
    Ok(MetricLimit {
        limit,
        steps,
        source: if metric_ok { ModulusSource::Metric } else { ModulusSource::Comparison },
        to_candidate,
        candidate_agrees,
    })
}

// ---------------------------------------------------------------------------
// Lsc metric and the shift counterexample

/// `inf { r : α_h(1_V) ≤ α_g(1_{V_r}) and α_g(1_V) ≤ α_h(1_{V_r}) }` for the
/// pullback morphisms `α_h(f) = f ∘ h`, with `V` ranging over open intervals
/// with endpoints on the grid of mesh `1/m` and `V_r` the exact neighbourhood.
pub fn lsc_metric(h: &PlMap, g: &PlMap, m: u64) -> Result<Q> {
    if m == 0 || !h.maps_into_unit() || !g.maps_into_unit() {
        return Err(CuError::InvalidParameter("needs m >= 1 and maps into [0,1]".into()));
    }
    let one_way = |h: &PlMap, g: &PlMap| -> Q {
        LscInterval::grid_intervals(m)
            .iter()
            .map(|iv| {
                // dist(g(y), V) over y with h(y) ∈ V
                let (a, b) = (
                    if iv.lo_closed { Q::int(-1) } else { iv.lo.clone() },
                    if iv.hi_closed { Q::int(2) } else { iv.hi.clone() },
                );
                let mut ys: Vec<Q> = h.breaks().iter().chain(g.breaks()).cloned().collect();
                for v in [&a, &b] {
                    ys.extend(h.preimage_points(v));
                    ys.extend(g.preimage_points(v));
                }
                let ys = sorted(ys);
                let dist = |y: &Q| {
                    let gy = g.eval(y);
                    (&a - &gy).max(&gy - &b).max(Q::zero())
                };
                let inside = |y: &Q| {
                    let hy = h.eval(y);
                    a < hy && hy < b
                };
                let mut best = Q::zero();
                for (k, y) in ys.iter().enumerate() {
                    // sup over the open set {h ∈ V} is a max over the closure of its pieces
                    let left = k > 0 && inside(&ys[k - 1].mid(y));
                    let right = k + 1 < ys.len() && inside(&y.mid(&ys[k + 1]));
                    if inside(y) || left || right {
                        best = best.max(dist(y));
                    }
                }
                best
            })
            .max()
            .unwrap_or_else(Q::zero)
    };
    Ok(one_way(h, g).max(one_way(g, h)))
}

/// Ball paths centered on the grid `{j/m}`, with a certificate search for
/// `{0,1}`-valued step functions.
pub fn ball_family(m: u64) -> Result<GeneratingFamily<BallPath>> {
    if m == 0 {
        return Err(CuError::InvalidParameter("grid needs m >= 1".into()));
    }
    let paths = (0..=m as i64).map(|j| BallPath::new(Q::new(j, m as i64))).collect::<Result<_>>()?;
    Ok(GeneratingFamily::new(paths)?.with_finder(ball_squeeze))
}

/// One ball per closed component of `{lo ≥ 1}`, slightly larger than it and
/// kept inside `{hi ≥ 1}` and away from the other components.
fn ball_squeeze(paths: &[BallPath], lo: &StepLsc, hi: &StepLsc) -> Option<Vec<(usize, Q)>> {
    if lo.max_value() > Fin(1) {
        return None;
    }
    let mut comps: Vec<(Q, Q)> = vec![];
    for c in lo.level_set(1) {
        match comps.last_mut() {
            Some(last) if last.1 >= c.lo => last.1 = c.hi,
            _ => comps.push((c.lo, c.hi)),
        }
    }
    let hosts = hi.level_set(1);
    let mut terms = vec![];
    for (k, (a, b)) in comps.iter().enumerate() {
        let host = hosts.iter().find(|o| o.contains(a) && o.contains(b))?;
        let mut gaps: Vec<Q> = vec![Q::new(1, 2)];
        if a.is_positive() {
            gaps.push(a - &host.lo);
        }
        if *b < Q::one() {
            gaps.push(&host.hi - b);
        }
        if k > 0 {
            gaps.push(a - &comps[k - 1].1);
        }
        if k + 1 < comps.len() {
            gaps.push(&comps[k + 1].0 - b);
        }
        let delta = gaps.into_iter().min()? / Q::int(3);
        if !delta.is_positive() {
            return None;
        }
        let (center, radius) = match (a.is_zero(), *b == Q::one()) {
            (true, true) => (Q::new(1, 2), Q::new(1, 2)),
            (true, false) => (Q::zero(), b.clone()),
            (false, true) => (Q::one(), Q::one() - a),
            (false, false) => (a.mid(b), (b - a) / Q::int(2)),
        };
        let i = paths.iter().position(|p| *p.center() == center)?;
        let t = (Q::one() - radius - delta).max(Q::zero());
        terms.push((i, t));
    }
    Some(terms)
}

/// `λ_n`: `1_{(t,1]} ↦ 1_{(f_n(t),1]}` with `f_n` through `0 ↦ 0`, `1/2 ↦ 1/n`, `1 ↦ 1`.
pub fn lambda_path(n: u64) -> Result<ChainPath> {
    if n < 2 {
        return Err(CuError::InvalidParameter("λ_n needs n >= 2".into()));
    }
    ChainPath::new(PlMap::new(
        vec![Q::zero(), Q::new(1, 2), Q::one()],
        vec![Q::zero(), Q::new(1, n as i64), Q::one()],
    )?)
}

/// `{λ_2, …, λ_m}`, a truncation of the infinite family.
pub fn lambda_family(m: u64) -> Result<GeneratingFamily<ChainPath>> {
    let paths = (2..=m).map(lambda_path).collect::<Result<_>>()?;
    Ok(GeneratingFamily::new(paths)?.truncated(m as usize - 1))
}

/// One row of the shift counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftRow {
    pub n: u64,
    /// `d_G(τ_n ∘ λ_n, λ_n)`.
    pub diagonal: Q,
    /// `d_Λ(τ_n, id)` over the truncated family.
    pub d_lambda: LambdaDistance,
}

/// `τ_n = shift by 1/n` against the identity, for `2 <= n <= max_n`, with
/// `Λ = {λ_2, …, λ_m}`.
pub fn shift_counterexample(max_n: u64, m: u64) -> Result<Vec<ShiftRow>> {
    let family = lambda_family(m)?;
    (2..=max_n)
        .into_par_iter()
        .map(|n| {
            let tau = ChainMap::shift(&Q::new(1, n as i64));
            let lam = lambda_path(n)?;
            let diagonal = d_g(&tau.push(&lam), &lam)?;
            let d_lambda = d_lambda(&tau, &ChainMap::identity(), &family)?;
            Ok(ShiftRow { n, diagonal, d_lambda })
        })
        .collect()
}

/// The least `N <= max_n` with `τ_n ≃_F id` for all `N <= n <= max_n`, `F` the
/// depth basis of `G`.
pub fn shift_comparison_index(depth: usize, max_n: u64) -> Option<u64> {
    let f = FiniteSubset::basis(&GeneratorG, depth);
    let id = Hom::identity(Arc::new(GeneratorG));
    let ok = |n: u64| {
        ChainMap::shift(&Q::new(1, n as i64))
            .to_hom()
            .compare_on(&id, &f)
            .unwrap_or(false)
    };
    let mut n = max_n + 1;
    while n > 1 && ok(n - 1) {
        n -= 1;
    }
    (n <= max_n).then_some(n)
}

/// A path `x` on `[0, ε)` and `x'` on `[ε, 1)`, built from `x' ≪ x`.
pub fn discriminating_path<S: CuSemigroup + 'static>(
    target: Arc<S>,
    lo: &S::Elem,
    hi: &S::Elem,
    eps: &Q,
) -> Result<StepPath<S>> {
    if !target.way_below(lo, hi) {
        return Err(CuError::Precondition("needs x' ≪ x".into()));
    }
    if !eps.is_positive() || *eps >= Q::one() {
        return Err(CuError::InvalidParameter("ε must lie in (0,1)".into()));
    }
    StepPath::new(target, vec![Q::zero(), eps.clone()], vec![hi.clone(), lo.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::ElementaryHom;
    use crate::instances::{Elementary, ExtNatSg, Inf};
    use crate::rational::q;

    #[test]
    fn chain_in_extnat() {
        let p = path_from_chain(Arc::new(ExtNatSg), &[Fin(1), Fin(2), Fin(3)]).unwrap();
        assert_eq!(p.value(&q(1, 3)), Fin(3));
        assert_eq!(p.value(&q(1, 2)), Fin(2));
        assert_eq!(p.value(&Q::one()), Fin(0));
        assert!(path_from_chain(Arc::new(ExtNatSg), &[Fin(2), Fin(1)]).is_err());
    }

    #[test]
    fn zero_then_jump_in_e3() {
        let e3 = Arc::new(Elementary::new(3).unwrap());
        let p = path_from_chain(e3, &[Fin(0), Fin(0), Fin(0), Fin(3)]).unwrap();
        assert_eq!(p.breaks().len(), 2);
        assert_eq!(d_g(&p, &p).unwrap(), Q::zero());
    }

    #[test]
    fn step_distance_by_hand() {
        let e = Arc::new(Elementary::new(3).unwrap());
        let u = StepPath::new(e.clone(), vec![Q::zero(), q(1, 2)], vec![Fin(2), Fin(1)]).unwrap();
        let w = StepPath::new(e, vec![Q::zero(), q(1, 4)], vec![Fin(2), Fin(1)]).unwrap();
        // w(t + 1/4) ≤ u(t) everywhere, and u is pointwise above w
        assert_eq!(d_g(&u, &w).unwrap(), q(1, 4));
    }

    #[test]
    fn soft_ray_half() {
        let u = RayPath::affine(2, Q::one()).unwrap();
        let w = RayPath::affine(2, q(1, 2)).unwrap();
        assert_eq!(d_g(&u, &w).unwrap(), q(1, 2));
    }

    #[test]
    fn compact_constants_are_far_apart() {
        let c = RayPath::compact(2, Q::one()).unwrap();
        let a = SoftScale::new(2, Q::one()).unwrap();
        let b = SoftScale::new(2, Q::int(2)).unwrap();
        assert_eq!(d_g(&a.push(&c), &b.push(&c)).unwrap(), Q::one());
    }

    #[test]
    fn diagonal_shift_is_half() {
        for n in 2..=8 {
            let lam = lambda_path(n).unwrap();
            let tau = ChainMap::shift(&q(1, n as i64));
            assert_eq!(d_g(&tau.push(&lam), &lam).unwrap(), q(1, 2), "n = {n}");
        }
    }

    #[test]
    fn ball_paths_see_sup_distance() {
        let h = PlMap::uniform(vec![Q::zero(), q(1, 2), Q::one()]).unwrap();
        let g = PlMap::uniform(vec![q(1, 4), q(3, 4), Q::one()]).unwrap();
        let fam = ball_family(4).unwrap();
        let d = d_lambda(&h, &g, &fam).unwrap();
        assert_eq!(d.value, crate::pl::pl_sup_distance(&h, &g));
    }

    #[test]
    fn shift_by_quarter() {
        let h = PlMap::identity();
        let g = PlMap::new(vec![Q::zero(), q(3, 4), Q::one()], vec![q(1, 4), Q::one(), Q::one()]).unwrap();
        assert_eq!(lsc_metric(&h, &g, 4).unwrap(), q(1, 4));
        assert_eq!(lsc_metric(&h, &h, 4).unwrap(), Q::zero());
    }

    #[test]
    fn elementary_family_bridge() {
        let e = Arc::new(Elementary::new(4).unwrap());
        let fam = GeneratingFamily::new(vec![path_from_chain(
            e.clone(),
            &[Fin(0), Fin(1), Fin(2), Fin(3), Fin(4), Inf],
        )
        .unwrap()])
        .unwrap();
        let f = FiniteSubset::new(e.as_ref(), [Fin(2), Fin(3)]);
        let b = bridge_eps_for_set(&f, &fam).unwrap();
        assert!(b.eps.is_positive());
        let alpha = ElementaryHom::new(4, 4, Fin(1)).unwrap().to_hom();
        assert_eq!(d_lambda(&alpha, &alpha, &fam).unwrap().value, Q::zero());
    }
}
