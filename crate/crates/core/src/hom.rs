//! Morphisms: evaluation, composition, law checking, and the closed-form
//! hom-sets of elementary and simplicial semigroups with their duality.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_same, CuError, Result};
use crate::instances::{Elementary, ExtNat, Fin, Inf, Simplicial};
use crate::semigroup::{compare_maps, compare_maps_witness, CuSemigroup, FiniteSubset};

type MapFn<S, T> = dyn Fn(&<S as CuSemigroup>::Elem) -> <T as CuSemigroup>::Elem + Send + Sync;

/// A map between presentations, given by a rule on canonical elements.
pub struct Hom<S: CuSemigroup, T: CuSemigroup> {
    dom: Arc<S>,
    cod: Arc<T>,
    label: String,
    map: Arc<MapFn<S, T>>,
}

impl<S: CuSemigroup, T: CuSemigroup> Clone for Hom<S, T> {
    fn clone(&self) -> Self {
        Hom {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            label: self.label.clone(),
            map: self.map.clone(),
        }
    }
}

impl<S: CuSemigroup, T: CuSemigroup> fmt::Debug for Hom<S, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.label, self.dom.name(), self.cod.name())
    }
}

impl<S: CuSemigroup + 'static, T: CuSemigroup + 'static> Hom<S, T> {
    pub fn new<F>(dom: Arc<S>, cod: Arc<T>, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&S::Elem) -> T::Elem + Send + Sync + 'static,
    {
        Hom { dom, cod, label: label.into(), map: Arc::new(f) }
    }

    pub fn apply(&self, x: &S::Elem) -> T::Elem {
        (self.map)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dom(&self) -> &Arc<S> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<T> {
        &self.cod
    }

    /// `next ∘ self`.
    pub fn then<U: CuSemigroup + 'static>(&self, next: &Hom<T, U>) -> Hom<S, U> {
        let a = self.map.clone();
        let b = next.map.clone();
        Hom {
            dom: self.dom.clone(),
            cod: next.cod.clone(),
            label: format!("{}.{}", next.label, self.label),
            map: Arc::new(move |x| b(&a(x))),
        }
    }

    fn same_shape(&self, other: &Hom<S, T>) -> Result<()> {
        check_same(&self.dom.name(), &other.dom.name())?;
        check_same(&self.cod.name(), &other.cod.name())
    }

    /// `self ≃_F other`.
    pub fn compare_on(&self, other: &Hom<S, T>, f: &FiniteSubset<S::Elem>) -> Result<bool> {
        self.same_shape(other)?;
        check_same(&self.dom.name(), &f.host)?;
        Ok(compare_maps(&*self.cod, |x| self.apply(x), |x| other.apply(x), f))
    }

    /// The first `≪`-pair of `F` on which the comparison fails.
    pub fn compare_witness(
        &self,
        other: &Hom<S, T>,
        f: &FiniteSubset<S::Elem>,
    ) -> Result<Option<(S::Elem, S::Elem)>> {
        self.same_shape(other)?;
        check_same(&self.dom.name(), &f.host)?;
        Ok(compare_maps_witness(&*self.cod, |x| self.apply(x), |x| other.apply(x), f))
    }
}

impl<S: CuSemigroup + 'static> Hom<S, S> {
    pub fn identity(s: Arc<S>) -> Hom<S, S> {
        Hom::new(s.clone(), s, "id", |x: &S::Elem| x.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Law {
    Zero,
    Additive,
    Order,
    WayBelow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawViolation {
    pub law: Law,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub morphism: String,
    pub depth: usize,
    pub pairs_checked: usize,
    pub violations: Vec<LawViolation>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks preservation of `0`, `+`, `≤` and `≪` on all pairs of `B_depth`.
pub fn morphism_laws_check<S, T>(alpha: &Hom<S, T>, depth: usize) -> LawReport
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    let (s, t) = (&*alpha.dom, &*alpha.cod);
    let basis = s.basis(depth);
    let images: Vec<T::Elem> = basis.par_iter().map(|x| alpha.apply(x)).collect();
    let mut violations = vec![];
    if alpha.apply(&s.zero()) != t.zero() {
        violations.push(LawViolation {
            law: Law::Zero,
            witnesses: vec![t.encode(&alpha.apply(&s.zero()))],
        });
    }
    let n = basis.len();
    let found: Vec<LawViolation> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (basis, images) = (&basis, &images);
            (0..n).flat_map(move |j| {
                let (x, y) = (&basis[i], &basis[j]);
                let (ax, ay) = (&images[i], &images[j]);
                let mut v = vec![];
                let sum = alpha.apply(&s.add(x, y));
                if sum != t.add(ax, ay) {
                    v.push((Law::Additive, x, y));
                }
                if s.leq(x, y) && !t.leq(ax, ay) {
                    v.push((Law::Order, x, y));
                }
                if s.way_below(x, y) && !t.way_below(ax, ay) {
                    v.push((Law::WayBelow, x, y));
                }
                v.into_iter().map(|(law, x, y)| LawViolation {
                    law,
                    witnesses: vec![s.encode(x), s.encode(y)],
                })
            })
        })
        .collect();
    violations.extend(found);
    LawReport {
        morphism: alpha.label.clone(),
        depth,
        pairs_checked: n * n,
        violations,
    }
}

/// The morphism `E_n → E_m` determined by `α(1) = k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementaryHom {
    pub n: u64,
    pub m: u64,
    pub k: ExtNat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElemHomKind {
    NotMorphism,
    Morphism,
    OrderEmbedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HomKind {
    Morphisms,
    Embeddings,
}

impl ElementaryHom {
    pub fn new(n: u64, m: u64, k: ExtNat) -> Result<ElementaryHom> {
        if n == 0 || m == 0 {
            return Err(CuError::InvalidParameter("E_n needs n >= 1".into()));
        }
        if matches!(k, Fin(v) if v > m) {
            return Err(CuError::InvalidParameter(format!("{k} is not in E_{m}")));
        }
        Ok(ElementaryHom { n, m, k })
    }

    /// `j ↦ j·k` saturated in `E_m`; `∞ ↦ (n+1)·k`.
    pub fn apply(&self, x: &ExtNat) -> ExtNat {
        let target = Elementary::new(self.m).expect("m >= 1");
        match x {
            Fin(j) => target.clamp(Fin(*j) * self.k),
            Inf => target.clamp(Fin(self.n + 1) * self.k),
        }
    }

    pub fn classify(&self) -> ElemHomKind {
        elementary_hom_classify(self.n, self.m, self.k)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &ElementaryHom) -> ElementaryHom {
        debug_assert_eq!(self.m, other.n);
        ElementaryHom { n: self.n, m: other.m, k: other.apply(&self.k) }
    }

    pub fn to_hom(&self) -> Hom<Elementary, Elementary> {
        let me = *self;
        Hom::new(
            Arc::new(Elementary::new(self.n).expect("n >= 1")),
            Arc::new(Elementary::new(self.m).expect("m >= 1")),
            format!("E{}->E{}:1->{}", self.n, self.m, self.k),
            move |x| me.apply(x),
        )
    }
}

/// Classification of `α(1) = k` for `E_n → E_m`: a morphism iff `(n+1)·k`
/// saturates (or `k = 0`), an order-embedding iff moreover `k ≠ 0` and `n·k ≠ ∞`.
pub fn elementary_hom_classify(n: u64, m: u64, k: ExtNat) -> ElemHomKind {
    let target = match Elementary::new(m) {
        Ok(t) if n >= 1 && t.contains(&k) => t,
        _ => return ElemHomKind::NotMorphism,
    };
    if k.is_zero() {
        return ElemHomKind::Morphism;
    }
    if target.clamp(Fin(n + 1) * k) != Inf {
        return ElemHomKind::NotMorphism;
    }
    if target.clamp(Fin(n) * k) != Inf {
        ElemHomKind::OrderEmbedding
    } else {
        ElemHomKind::Morphism
    }
}

/// All morphisms (or order-embeddings) `E_n → E_m`, ordered by `α(1)`.
pub fn elementary_enumerate(n: u64, m: u64, kind: HomKind) -> Vec<ElementaryHom> {
    (0..=m)
        .map(Fin)
        .chain(std::iter::once(Inf))
        .filter(|&k| match elementary_hom_classify(n, m, k) {
            ElemHomKind::OrderEmbedding => true,
            ElemHomKind::Morphism => kind == HomKind::Morphisms,
            ElemHomKind::NotMorphism => false,
        })
        .map(|k| ElementaryHom { n, m, k })
        .collect()
}

/// The order-embedding `E_{n^k} → E_{n^s}`, `1 ↦ n^{s-k}`.
pub fn en_category_embedding(n: u64, k: u32, s: u32) -> Result<ElementaryHom> {
    if k > s {
        return Err(CuError::InvalidParameter(format!("no embedding from stage {k} to stage {s}")));
    }
    if n < 2 && s > 0 {
        return Err(CuError::InvalidParameter("base must be at least 2".into()));
    }
    let pow = |e: u32| {
        n.checked_pow(e)
            .ok_or_else(|| CuError::InvalidParameter(format!("{n}^{e} overflows")))
    };
    ElementaryHom::new(pow(k)?, pow(s)?, Fin(pow(s - k)?))
}

/// A matrix over `N̄` acting on column vectors: `N̄^cols → N̄^rows`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimplicialHom {
    pub entries: Vec<Vec<ExtNat>>,
    pub cols: usize,
}

impl SimplicialHom {
    pub fn new(entries: Vec<Vec<ExtNat>>, cols: usize) -> Result<SimplicialHom> {
        if entries.is_empty() || cols == 0 || entries.iter().any(|r| r.len() != cols) {
            return Err(CuError::InvalidParameter("matrix shape".into()));
        }
        Ok(SimplicialHom { entries, cols })
    }

    pub fn identity(r: usize) -> SimplicialHom {
        let entries = (0..r)
            .map(|i| (0..r).map(|j| Fin(u64::from(i == j))).collect())
            .collect();
        SimplicialHom { entries, cols: r }
    }

    /// `l ↦ l ∘ f` for `f: {0..len} → {0..r}`.
    pub fn from_function(f: &[usize], r: usize) -> Result<SimplicialHom> {
        if f.iter().any(|&j| j >= r) {
            return Err(CuError::InvalidParameter("function leaves its codomain".into()));
        }
        let entries = f
            .iter()
            .map(|&j| (0..r).map(|c| Fin(u64::from(c == j))).collect())
            .collect();
        SimplicialHom::new(entries, r)
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn apply(&self, x: &[ExtNat]) -> Vec<ExtNat> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(x).fold(Fin(0), |acc, (a, b)| acc + *a * *b))
            .collect()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimplicialHom) -> SimplicialHom {
        let entries = other
            .entries
            .iter()
            .map(|row| {
                (0..self.cols)
                    .map(|c| {
                        row.iter()
                            .zip(&self.entries)
                            .fold(Fin(0), |acc, (a, srow)| acc + *a * srow[c])
                    })
                    .collect()
            })
            .collect();
        SimplicialHom { entries, cols: self.cols }
    }

    pub fn to_hom(&self) -> Hom<Simplicial, Simplicial> {
        let me = self.clone();
        Hom::new(
            Arc::new(Simplicial::new(self.cols).expect("cols >= 1")),
            Arc::new(Simplicial::new(self.rows()).expect("rows >= 1")),
            format!("{:?}", self.entries),
            move |x: &Vec<ExtNat>| me.apply(x),
        )
    }
}

/// Every column has a private row carrying a finite nonzero entry.
pub fn simplicial_is_embedding(m: &SimplicialHom) -> bool {
    (0..m.cols).all(|j| {
        m.entries.iter().any(|row| {
            matches!(row[j], Fin(v) if v > 0)
                && row.iter().enumerate().all(|(c, e)| c == j || e.is_zero())
        })
    })
}

pub fn simplicial_maps_one_to_one(m: &SimplicialHom) -> bool {
    m.apply(&vec![Fin(1); m.cols]).iter().all(|v| *v == Fin(1))
}

/// The function `f_α` dual to a unital morphism of finite discrete sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteDual {
    pub map: Vec<usize>,
    pub codomain_size: usize,
    pub surjective: bool,
}

pub fn lsc_dual_map(m: &SimplicialHom) -> Result<FiniteDual> {
    if !simplicial_maps_one_to_one(m) {
        return Err(CuError::Precondition("morphism does not send 1 to 1".into()));
    }
    let map: Vec<usize> = m
        .entries
        .iter()
        .map(|row| row.iter().position(|e| *e == Fin(1)))
        .collect::<Option<_>>()
        .ok_or_else(|| CuError::Representation("row is not an indicator".into()))?;
    let mut hit = vec![false; m.cols];
    for &j in &map {
        hit[j] = true;
    }
    Ok(FiniteDual {
        surjective: hit.iter().all(|&h| h),
        map,
        codomain_size: m.cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::SoftDim;
    use crate::instances::softdim::Dim;
    use crate::rational::Q;

    #[test]
    fn compare_on_examples() {
        let a = ElementaryHom::new(1, 6, Fin(4)).unwrap().to_hom();
        let b = ElementaryHom::new(1, 6, Fin(5)).unwrap().to_hom();
        let f = FiniteSubset::new(&**a.dom(), [Fin(1)]);
        assert!(!a.compare_on(&b, &f).unwrap());
        assert!(a.compare_on(&a, &f).unwrap());
        let c = ElementaryHom::new(2, 6, Fin(3)).unwrap().to_hom();
        let g = FiniteSubset::new(&**c.dom(), [Fin(1)]);
        assert!(matches!(a.compare_on(&a, &g), Err(CuError::DomainMismatch { .. })));
    }

    #[test]
    fn classification_examples() {
        for n in 1..=6u64 {
            let emb = elementary_enumerate(n, n * (n + 1), HomKind::Embeddings);
            assert_eq!(emb.iter().map(|h| h.k).collect::<Vec<_>>(), vec![Fin(n + 1)]);
        }
        let ks: Vec<_> = elementary_enumerate(1, 6, HomKind::Embeddings).iter().map(|h| h.k).collect();
        assert_eq!(ks, vec![Fin(4), Fin(5), Fin(6)]);
        assert_eq!(elementary_hom_classify(1, 2, Fin(1)), ElemHomKind::NotMorphism);
        assert!(elementary_enumerate(3, 5, HomKind::Morphisms).iter().any(|h| h.k == Inf));
    }

    #[test]
    fn en_embeddings() {
        let e = en_category_embedding(2, 1, 2).unwrap();
        assert_eq!((e.n, e.m, e.k), (2, 4, Fin(2)));
        let e = en_category_embedding(3, 0, 2).unwrap();
        assert_eq!(e.classify(), ElemHomKind::OrderEmbedding);
        assert!(en_category_embedding(2, 3, 1).is_err());
        for n in 2..=3 {
            for s in 0..=3 {
                for k in 0..=s {
                    let h = en_category_embedding(n, k, s).unwrap();
                    assert!(morphism_laws_check(&h.to_hom(), 100).passed());
                }
            }
        }
    }

    #[test]
    fn compact_to_soft_fails() {
        let s = Arc::new(SoftDim::new(2).unwrap());
        let bad = Hom::new(s.clone(), s, "soften", |x: &Dim| match x {
            Dim::Compact(q) if !q.is_zero() => Dim::Soft(q.clone()),
            other => other.clone(),
        });
        let r = morphism_laws_check(&bad, 1);
        assert!(r.violations.iter().any(|v| v.law == Law::WayBelow));
        let _ = Q::one();
    }

    #[test]
    fn simplicial_predicates() {
        let id = SimplicialHom::identity(3);
        assert!(simplicial_is_embedding(&id) && simplicial_maps_one_to_one(&id));
        let jep = SimplicialHom::from_function(&[0, 1, 0, 0, 0], 2).unwrap();
        assert!(simplicial_is_embedding(&jep) && simplicial_maps_one_to_one(&jep));
        let zero_col = SimplicialHom::new(vec![vec![Fin(1), Fin(0)], vec![Fin(2), Fin(0)]], 2).unwrap();
        assert!(!simplicial_is_embedding(&zero_col));
    }

    #[test]
    fn dual_of_surjection() {
        let m = SimplicialHom::from_function(&[0, 1, 0], 2).unwrap();
        let d = lsc_dual_map(&m).unwrap();
        assert_eq!(d.map, vec![0, 1, 0]);
        assert!(d.surjective);
        let collapsed = SimplicialHom::from_function(&[0, 0], 2).unwrap();
        let d = lsc_dual_map(&collapsed).unwrap();
        assert!(!d.surjective && !simplicial_is_embedding(&collapsed));
        let not_unital = SimplicialHom::new(vec![vec![Fin(2)]], 1).unwrap();
        assert!(matches!(lsc_dual_map(&not_unital), Err(CuError::Precondition(_))));
    }
}
