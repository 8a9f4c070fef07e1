//! The built-in categories: `s_p`, `e_∞`, `e_p`, `K_Cantor`, `K_P` and the
//! rank-bounded retractable simplicial category.

use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{Elem, FraisseCategory};
use crate::error::{CuError, Result};
use crate::hom::{elementary_enumerate, ElementaryHom, HomKind, SimplicialHom};
use crate::instances::{Elementary, ExtNat, ExtNatSg, Fin, Inf, LscInterval, Simplicial, StepLsc};
use crate::pl::{kp_amalgamate, PlMap};
use crate::rational::Q;
use crate::semigroup::FiniteSubset;

fn pow(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("stage exponent overflows u64")
}

fn scale(x: ExtNat, c: u64) -> ExtNat {
    match x {
        Fin(v) => Fin(v.checked_mul(c).expect("stage value overflows u64")),
        Inf => Inf,
    }
}

/// `s_p`: the single object `N̄` with the maps `×p^a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sp {
    pub p: u64,
}

impl Sp {
    pub fn new(p: u64) -> Result<Sp> {
        crate::instances::SoftDim::new(p)?;
        Ok(Sp { p })
    }
}

impl FraisseCategory for Sp {
    type Obj = ();
    /// The exponent `a` of `×p^a`.
    type Mor = u32;
    type Sg = ExtNatSg;

    fn name(&self) -> String {
        format!("s_{}", self.p)
    }

    fn semigroup(&self, _: &()) -> Arc<ExtNatSg> {
        Arc::new(ExtNatSg)
    }

    fn objects(&self, _: usize) -> Vec<()> {
        vec![()]
    }

    fn homs(&self, _: &(), _: &(), bound: usize) -> Vec<u32> {
        (0..=bound as u32).collect()
    }

    fn dom(&self, _: &u32) {}

    fn cod(&self, _: &u32) {}

    fn apply(&self, a: &u32, x: &ExtNat) -> ExtNat {
        scale(*x, pow(self.p, *a))
    }

    fn compose(&self, g: &u32, f: &u32) -> u32 {
        g + f
    }

    fn identity(&self, _: &()) -> u32 {
        0
    }

    /// `×p^g ∘ ×p^a = ×p^{g+a-b} ∘ ×p^b` with `g = max(b - a, 1)`.
    fn amalgamate_closed(&self, a1: &u32, a2: &u32, _: &FiniteSubset<ExtNat>) -> Option<Result<((), u32, u32)>> {
        let g1 = a2.saturating_sub(*a1).max(1);
        Some(Ok(((), g1, g1 + a1 - a2)))
    }

    fn join_closed(&self, _: &(), _: &()) -> Option<((), u32, u32)> {
        Some(((), 0, 0))
    }

    fn encode_mor(&self, a: &u32) -> String {
        format!("x{}^{a}", self.p)
    }
}

/// `e_∞`: the semigroups `E_n`, `n ≥ 1`, with all nonzero morphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EInf;

impl FraisseCategory for EInf {
    type Obj = u64;
    type Mor = ElementaryHom;
    type Sg = Elementary;

    fn name(&self) -> String {
        "e_inf".into()
    }

    fn semigroup(&self, n: &u64) -> Arc<Elementary> {
        Arc::new(Elementary::new(*n).expect("n >= 1"))
    }

    fn objects(&self, bound: usize) -> Vec<u64> {
        (1..=bound.max(1) as u64).collect()
    }

    fn homs(&self, a: &u64, b: &u64, _: usize) -> Vec<ElementaryHom> {
        elementary_enumerate(*a, *b, HomKind::Morphisms)
            .into_iter()
            .filter(|h| h.k != Fin(0))
            .collect()
    }

    fn dom(&self, f: &ElementaryHom) -> u64 {
        f.n
    }

    fn cod(&self, f: &ElementaryHom) -> u64 {
        f.m
    }

    fn apply(&self, f: &ElementaryHom, x: &ExtNat) -> ExtNat {
        f.apply(x)
    }

    fn compose(&self, g: &ElementaryHom, f: &ElementaryHom) -> ElementaryHom {
        f.then(g)
    }

    fn identity(&self, a: &u64) -> ElementaryHom {
        ElementaryHom { n: *a, m: *a, k: Fin(1) }
    }

    /// Both codomains map into `E_max` by `1 ↦ ∞`; the composites agree exactly.
    fn amalgamate_closed(
        &self,
        a1: &ElementaryHom,
        a2: &ElementaryHom,
        _: &FiniteSubset<ExtNat>,
    ) -> Option<Result<(u64, ElementaryHom, ElementaryHom)>> {
        let c = a1.m.max(a2.m);
        Some(ElementaryHom::new(a1.m, c, Inf).and_then(|b1| Ok((c, b1, ElementaryHom::new(a2.m, c, Inf)?))))
    }

    /// `E_a, E_b → E_{ab}` by `1 ↦ b` and `1 ↦ a`.
    fn join_closed(&self, a: &u64, b: &u64) -> Option<(u64, ElementaryHom, ElementaryHom)> {
        let c = a * b;
        Some((c, ElementaryHom { n: *a, m: c, k: Fin(*b) }, ElementaryHom { n: *b, m: c, k: Fin(*a) }))
    }
}

/// Elementary semigroups with order embeddings only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ElemEmb;

impl FraisseCategory for ElemEmb {
    type Obj = u64;
    type Mor = ElementaryHom;
    type Sg = Elementary;

    fn name(&self) -> String {
        "e_emb".into()
    }

    fn semigroup(&self, n: &u64) -> Arc<Elementary> {
        EInf.semigroup(n)
    }

    fn objects(&self, bound: usize) -> Vec<u64> {
        EInf.objects(bound)
    }

    fn homs(&self, a: &u64, b: &u64, _: usize) -> Vec<ElementaryHom> {
        elementary_enumerate(*a, *b, HomKind::Embeddings)
    }

    fn dom(&self, f: &ElementaryHom) -> u64 {
        f.n
    }

    fn cod(&self, f: &ElementaryHom) -> u64 {
        f.m
    }

    fn apply(&self, f: &ElementaryHom, x: &ExtNat) -> ExtNat {
        f.apply(x)
    }

    fn compose(&self, g: &ElementaryHom, f: &ElementaryHom) -> ElementaryHom {
        f.then(g)
    }

    fn identity(&self, a: &u64) -> ElementaryHom {
        EInf.identity(a)
    }
}

/// A morphism `E_{p^from} → E_{p^to}` of `e_p`, `1 ↦ p^{to-from}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpMor {
    pub from: u32,
    pub to: u32,
}

/// `e_p`: the semigroups `E_{p^k}` with the embeddings `1 ↦ p^{s-k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ep {
    pub p: u64,
}

impl Ep {
    pub fn new(p: u64) -> Result<Ep> {
        crate::instances::SoftDim::new(p)?;
        Ok(Ep { p })
    }
}

impl FraisseCategory for Ep {
    type Obj = u32;
    type Mor = EpMor;
    type Sg = Elementary;

    fn name(&self) -> String {
        format!("e_{}", self.p)
    }

    fn semigroup(&self, k: &u32) -> Arc<Elementary> {
        Arc::new(Elementary::new(pow(self.p, *k)).expect("p^k >= 1"))
    }

    fn objects(&self, bound: usize) -> Vec<u32> {
        (0..=bound as u32).collect()
    }

    fn homs(&self, a: &u32, b: &u32, _: usize) -> Vec<EpMor> {
        if a <= b {
            vec![EpMor { from: *a, to: *b }]
        } else {
            vec![]
        }
    }

    fn dom(&self, f: &EpMor) -> u32 {
        f.from
    }

    fn cod(&self, f: &EpMor) -> u32 {
        f.to
    }

    fn apply(&self, f: &EpMor, x: &ExtNat) -> ExtNat {
        let h = ElementaryHom {
            n: pow(self.p, f.from),
            m: pow(self.p, f.to),
            k: Fin(pow(self.p, f.to - f.from)),
        };
        h.apply(x)
    }

    fn compose(&self, g: &EpMor, f: &EpMor) -> EpMor {
        EpMor { from: f.from, to: g.to }
    }

    fn identity(&self, a: &u32) -> EpMor {
        EpMor { from: *a, to: *a }
    }

    fn amalgamate_closed(&self, a1: &EpMor, a2: &EpMor, _: &FiniteSubset<ExtNat>) -> Option<Result<(u32, EpMor, EpMor)>> {
        let c = a1.to.max(a2.to);
        Some(Ok((c, EpMor { from: a1.to, to: c }, EpMor { from: a2.to, to: c })))
    }

    fn join_closed(&self, a: &u32, b: &u32) -> Option<(u32, EpMor, EpMor)> {
        let c = *a.max(b);
        Some((c, EpMor { from: *a, to: c }, EpMor { from: *b, to: c }))
    }
}

/// `α: N̄^r → N̄^s`, `α(x)_i = x_{f(i)}`, for a surjection `f: [s] → [r]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CantorMor {
    pub f: Vec<usize>,
    pub r: usize,
}

impl CantorMor {
    pub fn new(f: Vec<usize>, r: usize) -> Result<CantorMor> {
        let mut hit = vec![false; r];
        for &j in &f {
            *hit.get_mut(j).ok_or_else(|| CuError::InvalidParameter(format!("{j} >= {r}")))? = true;
        }
        if r == 0 || !hit.iter().all(|&h| h) {
            return Err(CuError::InvalidParameter(format!("{f:?} is not onto [{r}]")));
        }
        Ok(CantorMor { f, r })
    }

    pub fn to_matrix(&self) -> SimplicialHom {
        SimplicialHom::from_function(&self.f, self.r).expect("valid surjection")
    }
}

/// Smallest preimages and the remaining points of a surjection.
fn section(m: &CantorMor) -> (Vec<usize>, Vec<usize>) {
    let mut sigma = vec![usize::MAX; m.r];
    let mut rest = vec![];
    for (i, &j) in m.f.iter().enumerate() {
        if sigma[j] == usize::MAX {
            sigma[j] = i;
        } else {
            rest.push(i);
        }
    }
    (sigma, rest)
}

/// `K_Cantor`: the simplicial semigroups `N̄^r` with unital order embeddings,
/// dual to surjections of finite sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KCantor;

fn surjections(s: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = vec![0usize; s];
    if r == 0 || s < r {
        return out;
    }
    loop {
        let mut hit = vec![false; r];
        cur.iter().for_each(|&j| hit[j] = true);
        if hit.iter().all(|&h| h) {
            out.push(cur.clone());
        }
        // lexicographic successor
        let mut i = s;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < r {
                cur[i] += 1;
                cur[i + 1..].iter_mut().for_each(|c| *c = 0);
                break;
            }
        }
    }
}

impl FraisseCategory for KCantor {
    type Obj = usize;
    type Mor = CantorMor;
    type Sg = Simplicial;

    fn name(&self) -> String {
        "K_Cantor".into()
    }

    fn semigroup(&self, r: &usize) -> Arc<Simplicial> {
        Arc::new(Simplicial::new(*r).expect("rank >= 1"))
    }

    fn objects(&self, bound: usize) -> Vec<usize> {
        (1..=bound.max(1)).collect()
    }

    fn homs(&self, a: &usize, b: &usize, _: usize) -> Vec<CantorMor> {
        surjections(*b, *a).into_iter().map(|f| CantorMor { f, r: *a }).collect()
    }

    fn dom(&self, m: &CantorMor) -> usize {
        m.r
    }

    fn cod(&self, m: &CantorMor) -> usize {
        m.f.len()
    }

    fn apply(&self, m: &CantorMor, x: &Vec<ExtNat>) -> Vec<ExtNat> {
        m.f.iter().map(|&j| x[j]).collect()
    }

    fn compose(&self, g: &CantorMor, f: &CantorMor) -> CantorMor {
        CantorMor { f: g.f.iter().map(|&i| f.f[i]).collect(), r: f.r }
    }

    fn identity(&self, a: &usize) -> CantorMor {
        CantorMor { f: (0..*a).collect(), r: *a }
    }

    /// `C = [r] ⊔ R1 ⊔ R2`, where `R_k` are the points of `[t_k]` off the
    /// section of smallest preimages; the duals satisfy `f1 ∘ p1 = f2 ∘ p2`.
    fn amalgamate_closed(
        &self,
        a1: &CantorMor,
        a2: &CantorMor,
        _: &FiniteSubset<Vec<ExtNat>>,
    ) -> Option<Result<(usize, CantorMor, CantorMor)>> {
        let r = a1.r;
        let (s1, r1) = section(a1);
        let (s2, r2) = section(a2);
        let mut p1: Vec<usize> = s1.clone();
        let mut p2: Vec<usize> = s2.clone();
        for &j in &r1 {
            p1.push(j);
            p2.push(s2[a1.f[j]]);
        }
        for &j in &r2 {
            p1.push(s1[a2.f[j]]);
            p2.push(j);
        }
        debug_assert_eq!(p1.len(), r + r1.len() + r2.len());
        let c = p1.len();
        Some(
            CantorMor::new(p1, a1.f.len())
                .and_then(|b1| Ok((c, b1, CantorMor::new(p2, a2.f.len())?))),
        )
    }

    /// Block construction on `[r1 + r2]`.
    fn join_closed(&self, a: &usize, b: &usize) -> Option<(usize, CantorMor, CantorMor)> {
        let n = a + b;
        let p1 = (0..n).map(|i| if i < *a { i } else { 0 }).collect();
        let p2 = (0..n).map(|i| if i < *a { 0 } else { i - a }).collect();
        Some((n, CantorMor { f: p1, r: *a }, CantorMor { f: p2, r: *b }))
    }
}

/// `K_P`: `Lsc([0,1], N̄)` with the morphisms induced by PL surjections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KPseudoArc;

/// PL surjections with uniform breakpoints and values on the grid `1/d`,
/// by increasing piece count and denominator, without constancy pieces.
fn pl_surjections(bound: usize) -> Vec<PlMap> {
    let mut out = vec![];
    for pieces in 1..=bound.max(1) {
        for d in 1..=2i64 {
            let vals: Vec<Q> = (0..=d).map(|i| Q::new(i, d)).collect();
            let mut idx = vec![0usize; pieces + 1];
            loop {
                let v: Vec<Q> = idx.iter().map(|&i| vals[i].clone()).collect();
                if let Ok(f) = PlMap::uniform(v) {
                    if f.check_strict_surjection().is_ok() && f.normalized() == f && !out.contains(&f) {
                        out.push(f);
                    }
                }
                let mut i = idx.len();
                let done = loop {
                    if i == 0 {
                        break true;
                    }
                    i -= 1;
                    if idx[i] + 1 < vals.len() {
                        idx[i] += 1;
                        idx[i + 1..].iter_mut().for_each(|c| *c = 0);
                        break false;
                    }
                };
                if done {
                    break;
                }
            }
        }
        if out.len() >= bound.max(1) * 4 {
            break;
        }
    }
    out
}

/// The mesh `1/n` of the coarsest uniform grid carrying every node of `F`.
fn grid_of(f: &FiniteSubset<StepLsc>) -> usize {
    f.elements
        .iter()
        .flat_map(|l| l.nodes())
        .map(|q| q.denom().to_usize().unwrap_or(1))
        .fold(1, num_integer::lcm)
}

impl FraisseCategory for KPseudoArc {
    type Obj = ();
    /// The dual surjection `f`; the morphism is `l ↦ l ∘ f`.
    type Mor = PlMap;
    type Sg = LscInterval;

    fn name(&self) -> String {
        "K_P".into()
    }

    fn semigroup(&self, _: &()) -> Arc<LscInterval> {
        Arc::new(LscInterval)
    }

    fn objects(&self, _: usize) -> Vec<()> {
        vec![()]
    }

    fn homs(&self, _: &(), _: &(), bound: usize) -> Vec<PlMap> {
        pl_surjections(bound)
    }

    fn dom(&self, _: &PlMap) {}

    fn cod(&self, _: &PlMap) {}

    fn apply(&self, f: &PlMap, x: &StepLsc) -> StepLsc {
        f.pull_back(x)
    }

    fn compose(&self, g: &PlMap, f: &PlMap) -> PlMap {
        f.compose(g)
    }

    fn identity(&self, _: &()) -> PlMap {
        PlMap::identity()
    }

    fn amalgamate_closed(&self, a1: &PlMap, a2: &PlMap, f: &FiniteSubset<StepLsc>) -> Option<Result<((), PlMap, PlMap)>> {
        Some(kp_amalgamate(a1, a2, f, grid_of(f)).map(|k| ((), k.beta1, k.beta2)))
    }

    fn join_closed(&self, _: &(), _: &()) -> Option<((), PlMap, PlMap)> {
        Some(((), PlMap::identity(), PlMap::identity()))
    }
}

/// A morphism `ι: N̄^r → N̄^s` with a generalized left inverse `ρ`, `ρ ∘ ι = id`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Retractable {
    pub iota: SimplicialHom,
    pub rho: SimplicialHom,
}

pub fn is_retraction(m: &Retractable) -> bool {
    m.iota.then(&m.rho) == SimplicialHom::identity(m.iota.cols)
}

/// `s_dim` restricted to ranks `≤ max_rank`: simplicial semigroups with
/// retractable maps whose rows are zero or unit vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SDim {
    pub max_rank: usize,
}

fn retractables(r: usize, s: usize) -> Vec<Retractable> {
    // row i of ι is e_{h(i)} or zero (h(i) = r)
    let mut out = vec![];
    let mut h = vec![0usize; s];
    loop {
        let hit = (0..r).all(|j| h.contains(&j));
        if hit {
            let rows: Vec<Vec<ExtNat>> = h
                .iter()
                .map(|&j| (0..r).map(|c| Fin(u64::from(c == j))).collect())
                .collect();
            let rho_rows: Vec<Vec<ExtNat>> = (0..r)
                .map(|j| {
                    let first = h.iter().position(|&x| x == j).expect("hit");
                    (0..s).map(|c| Fin(u64::from(c == first))).collect()
                })
                .collect();
            out.push(Retractable {
                iota: SimplicialHom::new(rows, r).expect("shape"),
                rho: SimplicialHom::new(rho_rows, s).expect("shape"),
            });
        }
        let mut i = s;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if h[i] < r {
                h[i] += 1;
                h[i + 1..].iter_mut().for_each(|c| *c = 0);
                break;
            }
        }
    }
}

impl FraisseCategory for SDim {
    type Obj = usize;
    type Mor = Retractable;
    type Sg = Simplicial;

    fn name(&self) -> String {
        format!("s_dim<={}", self.max_rank)
    }

    fn semigroup(&self, r: &usize) -> Arc<Simplicial> {
        Arc::new(Simplicial::new(*r).expect("rank >= 1"))
    }

    fn objects(&self, bound: usize) -> Vec<usize> {
        (1..=bound.clamp(1, self.max_rank)).collect()
    }

    fn homs(&self, a: &usize, b: &usize, _: usize) -> Vec<Retractable> {
        if *b > self.max_rank {
            return vec![];
        }
        retractables(*a, *b)
    }

    fn dom(&self, m: &Retractable) -> usize {
        m.iota.cols
    }

    fn cod(&self, m: &Retractable) -> usize {
        m.iota.rows()
    }

    fn apply(&self, m: &Retractable, x: &Elem<Self>) -> Elem<Self> {
        m.iota.apply(x)
    }

    fn compose(&self, g: &Retractable, f: &Retractable) -> Retractable {
        Retractable { iota: f.iota.then(&g.iota), rho: g.rho.then(&f.rho) }
    }

    fn identity(&self, a: &usize) -> Retractable {
        Retractable { iota: SimplicialHom::identity(*a), rho: SimplicialHom::identity(*a) }
    }
}

/// The direct-sum extension of a simplicial sequence: stage `i` is
/// `S_0 ⊕ … ⊕ S_i` and `τ(s_0, …, s_i) = (s_0, …, s_i, σ(s_i))`.
pub fn direct_sum_sequence(connecting: &[SimplicialHom]) -> Result<Vec<Retractable>> {
    let mut out = vec![];
    let mut ranks = vec![connecting.first().map(|s| s.cols).unwrap_or(0)];
    for s in connecting {
        if s.cols != *ranks.last().expect("nonempty") {
            return Err(CuError::InvalidParameter("connecting maps do not chain".into()));
        }
        let total: usize = ranks.iter().sum();
        let last_off = total - s.cols;
        let mut rows: Vec<Vec<ExtNat>> = (0..total)
            .map(|i| (0..total).map(|c| Fin(u64::from(i == c))).collect())
            .collect();
        for row in &s.entries {
            let mut r = vec![Fin(0); total];
            r[last_off..].copy_from_slice(row);
            rows.push(r);
        }
        let rho_rows: Vec<Vec<ExtNat>> = (0..total)
            .map(|i| (0..total + s.rows()).map(|c| Fin(u64::from(i == c))).collect())
            .collect();
        out.push(Retractable {
            iota: SimplicialHom::new(rows, total)?,
            rho: SimplicialHom::new(rho_rows, total + s.rows())?,
        });
        ranks.push(s.rows());
    }
    Ok(out)
}
