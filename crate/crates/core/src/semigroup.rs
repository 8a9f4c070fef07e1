//! The abstract interface: effectively presented Cu-semigroups, finite subsets,
//! finite-set comparison of maps, refinements and an exhaustive axiom checker.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{de::DeserializeOwned, Serialize};

/// Element types carried by a presentation.
pub trait Element:
    Clone + Eq + Ord + Hash + Debug + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

impl<T> Element for T where
    T: Clone + Eq + Ord + Hash + Debug + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

/// A positively ordered monoid with decidable `≤` and `≪` on canonical elements
/// and a nested, sup-dense basis stream.
pub trait CuSemigroup: Send + Sync {
    type Elem: Element;

    /// Opaque presentation identifier, e.g. `E_6` or `S_2`.
    fn name(&self) -> String;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn way_below(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    /// The finite set `B_depth`; `B_d ⊆ B_{d+1}`.
    fn basis(&self, depth: usize) -> Vec<Self::Elem>;
    /// Some `z` with `lo ≪ z ≪ hi`, or `None` when `lo ≪ hi` fails.
    fn interpolate(&self, lo: &Self::Elem, hi: &Self::Elem) -> Option<Self::Elem>;
    /// `sup_n n·x`.
    fn inf_multiple(&self, x: &Self::Elem) -> Self::Elem;
    fn encode(&self, x: &Self::Elem) -> String;

    fn is_compact(&self, x: &Self::Elem) -> bool {
        self.way_below(x, x)
    }

    fn sum<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
    {
        items
            .into_iter()
            .fold(self.zero(), |acc, x| self.add(&acc, x))
    }

    fn multiple(&self, k: u64, x: &Self::Elem) -> Self::Elem {
        (0..k).fold(self.zero(), |acc, _| self.add(&acc, x))
    }
}

/// Picks the least candidate strictly between `lo` and `hi` in the `≪` sense,
/// falling back to an endpoint when the pair is reflexive.
pub fn interpolate_from<S: CuSemigroup>(
    s: &S,
    candidates: impl IntoIterator<Item = S::Elem>,
    lo: &S::Elem,
    hi: &S::Elem,
) -> Option<S::Elem> {
    if !s.way_below(lo, hi) {
        return None;
    }
    let mut cands: Vec<_> = candidates.into_iter().collect();
    cands.sort();
    cands
        .into_iter()
        .find(|z| z != lo && z != hi && s.way_below(lo, z) && s.way_below(z, hi))
        .or_else(|| {
            if s.way_below(lo, lo) {
                Some(lo.clone())
            } else if s.way_below(hi, hi) {
                Some(hi.clone())
            } else {
                None
            }
        })
}

/// A finite subset `F` of a semigroup, with its `≪`-pairs cached.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(bound = "")]
pub struct FiniteSubset<E: Element> {
    pub host: String,
    pub elements: Vec<E>,
    /// Positions in `elements` of each `≪`-pair.
    pairs: Vec<(usize, usize)>,
}

impl<E: Element> FiniteSubset<E> {
    pub fn new<S: CuSemigroup<Elem = E>>(s: &S, elements: impl IntoIterator<Item = E>) -> Self {
        let mut elements: Vec<E> = elements.into_iter().collect();
        elements.sort();
        elements.dedup();
        let pairs = (0..elements.len())
            .flat_map(|i| (0..elements.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| s.way_below(&elements[i], &elements[j]))
            .collect();
        FiniteSubset {
            host: s.name(),
            elements,
            pairs,
        }
    }

    pub fn basis<S: CuSemigroup<Elem = E>>(s: &S, depth: usize) -> Self {
        Self::new(s, s.basis(depth))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: &E) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    /// All pairs `x' ≪ x` in `F`, including `x ≪ x` for compact `x`.
    pub fn ll_pairs(&self) -> impl Iterator<Item = (&E, &E)> + '_ {
        self.pairs.iter().map(|&(i, j)| (&self.elements[i], &self.elements[j]))
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Pairs `x' ≪ x` with `x' ≠ x`.
    pub fn strict_pairs(&self) -> impl Iterator<Item = (&E, &E)> + '_ {
        self.ll_pairs().filter(|(a, b)| a != b)
    }

    pub fn union<S: CuSemigroup<Elem = E>>(&self, s: &S, other: impl IntoIterator<Item = E>) -> Self {
        Self::new(s, self.elements.iter().cloned().chain(other))
    }

    /// Image of the elements under a map into another semigroup.
    pub fn image<T, M>(&self, t: &T, map: M) -> FiniteSubset<T::Elem>
    where
        T: CuSemigroup,
        M: Fn(&E) -> T::Elem,
    {
        FiniteSubset::new(t, self.elements.iter().map(map))
    }
}

/// `α ≃_F β`: for every `x' ≪ x` in `F`, `α(x') ≤ β(x)` and `β(x') ≤ α(x)`.
pub fn compare_maps<E, T, A, B>(codomain: &T, alpha: A, beta: B, f: &FiniteSubset<E>) -> bool
where
    E: Element,
    T: CuSemigroup,
    A: Fn(&E) -> T::Elem,
    B: Fn(&E) -> T::Elem,
{
    let a: Vec<T::Elem> = f.elements.iter().map(&alpha).collect();
    let b: Vec<T::Elem> = f.elements.iter().map(&beta).collect();
    let ok = |i: usize, j: usize| codomain.leq(&a[i], &b[j]) && codomain.leq(&b[i], &a[j]);
    f.pairs.iter().all(|&(i, j)| ok(i, j))
}

/// The first `≪`-pair on which the comparison fails.
pub fn compare_maps_witness<E, T, A, B>(
    codomain: &T,
    alpha: A,
    beta: B,
    f: &FiniteSubset<E>,
) -> Option<(E, E)>
where
    E: Element,
    T: CuSemigroup,
    A: Fn(&E) -> T::Elem,
    B: Fn(&E) -> T::Elem,
{
    f.ll_pairs()
        .find(|(xp, x)| {
            !(codomain.leq(&alpha(xp), &beta(x)) && codomain.leq(&beta(xp), &alpha(x)))
        })
        .map(|(xp, x)| (xp.clone(), x.clone()))
}

/// Builds an `n`-chain `f' ≪ g_1 ≪ … ≪ g_n ≪ f` by repeated interpolation.
pub fn interpolating_chain<S: CuSemigroup>(
    s: &S,
    lo: &S::Elem,
    hi: &S::Elem,
    n: usize,
) -> Option<Vec<S::Elem>> {
    if lo == hi {
        return s.is_compact(lo).then(|| vec![lo.clone(); n]);
    }
    let mut chain = Vec::with_capacity(n);
    let mut cur = lo.clone();
    for _ in 0..n {
        let z = s.interpolate(&cur, hi)?;
        chain.push(z.clone());
        cur = z;
    }
    Some(chain)
}

/// An `n`-refinement: a superset of `F` interpolating every `≪`-pair of `F`
/// by a chain of length `n`.
pub fn n_refinement<S: CuSemigroup>(
    s: &S,
    f: &FiniteSubset<S::Elem>,
    n: usize,
) -> FiniteSubset<S::Elem> {
    assert!(n >= 1, "refinement order must be positive");
    let extra: Vec<S::Elem> = f
        .strict_pairs()
        .flat_map(|(lo, hi)| {
            interpolating_chain(s, lo, hi, n).expect("interpolation contract violated by instance")
        })
        .collect();
    f.union(s, extra)
}

/// Checks that `g` contains an `n`-chain for every `≪`-pair of `f`.
pub fn is_n_refinement<S: CuSemigroup>(
    s: &S,
    f: &FiniteSubset<S::Elem>,
    g: &FiniteSubset<S::Elem>,
    n: usize,
) -> bool {
    if !f.elements.iter().all(|x| g.contains(x)) {
        return false;
    }
    f.ll_pairs().all(|(lo, hi)| {
        if lo == hi {
            return true;
        }
        // layered reachability through g
        let mut frontier: Vec<&S::Elem> = vec![lo];
        for _ in 0..n {
            let next: Vec<&S::Elem> = g
                .elements
                .iter()
                .filter(|z| frontier.iter().any(|c| s.way_below(c, z)) && s.way_below(z, hi))
                .collect();
            if next.is_empty() {
                return false;
            }
            frontier = next;
        }
        true
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axiom {
    BasisNested,
    ZeroNeutral,
    ZeroLeast,
    Commutative,
    Associative,
    Reflexive,
    Antisymmetric,
    Transitive,
    AddMonotone,
    WayBelowImpliesLeq,
    WayBelowTransitive,
    WayBelowCompatible,
    WayBelowAdditive,
    Interpolation,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AxiomReport {
    pub semigroup: String,
    pub depth: usize,
    pub elements_checked: usize,
    pub ll_pairs_checked: usize,
    pub total_violations: usize,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.total_violations == 0
    }

    fn record(&mut self, axiom: Axiom, witnesses: Vec<String>) {
        self.total_violations += 1;
        if self.violations.len() < 64 {
            self.violations.push(Violation { axiom, witnesses });
        }
    }
}

struct Interner<E> {
    items: Vec<E>,
    ids: HashMap<E, usize>,
}

impl<E: Element> Interner<E> {
    fn new() -> Self {
        Interner {
            items: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn id(&mut self, e: E) -> usize {
        if let Some(&i) = self.ids.get(&e) {
            return i;
        }
        self.items.push(e.clone());
        self.ids.insert(e, self.items.len() - 1);
        self.items.len() - 1
    }
}

/// Dense boolean matrix.
struct Rel {
    n: usize,
    bits: Vec<bool>,
}

impl Rel {
    fn build(n: usize, f: impl Fn(usize, usize) -> bool + Sync) -> Rel {
        let bits = (0..n * n)
            .into_par_iter()
            .map(|k| f(k / n, k % n))
            .collect();
        Rel { n, bits }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }
}

/// Exhaustively verifies the monoid, order and `≪` invariants on `B_depth`.
///
/// Sums of basis elements are interned so that the quadratic and quartic
/// checks run on lookup tables.
pub fn check_axioms<S: CuSemigroup>(s: &S, depth: usize) -> AxiomReport {
    let basis = s.basis(depth);
    let mut report = AxiomReport {
        semigroup: s.name(),
        depth,
        elements_checked: basis.len(),
        ..Default::default()
    };
    let enc = |x: &S::Elem| s.encode(x);

    if depth > 0 {
        let prev = s.basis(depth - 1);
        for x in prev.iter().filter(|x| !basis.contains(x)) {
            report.record(Axiom::BasisNested, vec![enc(x)]);
        }
    }

    let n = basis.len();
    let mut u: Interner<S::Elem> = Interner::new();
    for x in &basis {
        u.id(x.clone());
    }
    let zero = s.zero();
    let zid = u.id(zero.clone());

    let pair_sums: Vec<S::Elem> = (0..n * n)
        .into_par_iter()
        .map(|k| s.add(&basis[k / n], &basis[k % n]))
        .collect();
    let sum_bb: Vec<usize> = pair_sums.into_iter().map(|e| u.id(e)).collect();
    let m = u.items.len();
    let items = u.items.clone();

    for (i, x) in basis.iter().enumerate() {
        if s.add(&zero, x) != *x || s.add(x, &zero) != *x {
            report.record(Axiom::ZeroNeutral, vec![enc(x)]);
        }
        if !s.leq(&zero, x) {
            report.record(Axiom::ZeroLeast, vec![enc(x)]);
        }
        for j in 0..n {
            if sum_bb[i * n + j] != sum_bb[j * n + i] {
                report.record(Axiom::Commutative, vec![enc(x), enc(&basis[j])]);
            }
        }
    }
    let _ = zid;

    // associativity: (x+y)+z against x+(y+z)
    let assoc_bad: Vec<(usize, usize, usize)> = (0..n * n)
        .into_par_iter()
        .flat_map_iter(|k| {
            let (i, j) = (k / n, k % n);
            let xy = &items[sum_bb[k]];
            let basis = &basis;
            let items = &items;
            let sum_bb = &sum_bb;
            (0..n).filter_map(move |l| {
                let yz = &items[sum_bb[j * n + l]];
                let left = s.add(xy, &basis[l]);
                let right = s.add(&basis[i], yz);
                (left != right).then_some((i, j, l))
            })
        })
        .collect();
    for (i, j, l) in assoc_bad {
        report.record(Axiom::Associative, vec![enc(&basis[i]), enc(&basis[j]), enc(&basis[l])]);
    }

    let leq = Rel::build(m, |i, j| s.leq(&items[i], &items[j]));
    let wb = Rel::build(m, |i, j| s.way_below(&items[i], &items[j]));

    for i in 0..m {
        if !leq.get(i, i) {
            report.record(Axiom::Reflexive, vec![enc(&items[i])]);
        }
        for j in 0..m {
            if i < j && leq.get(i, j) && leq.get(j, i) {
                report.record(Axiom::Antisymmetric, vec![enc(&items[i]), enc(&items[j])]);
            }
            if wb.get(i, j) && !leq.get(i, j) {
                report.record(Axiom::WayBelowImpliesLeq, vec![enc(&items[i]), enc(&items[j])]);
            }
        }
    }

    let triples: Vec<(Axiom, usize, usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let leq = &leq;
            let wb = &wb;
            let sum_bb = &sum_bb;
            (0..n).flat_map(move |j| {
                (0..n).filter_map(move |k| {
                    if leq.get(i, j) && leq.get(j, k) && !leq.get(i, k) {
                        return Some((Axiom::Transitive, i, j, k));
                    }
                    if wb.get(i, j) && wb.get(j, k) && !wb.get(i, k) {
                        return Some((Axiom::WayBelowTransitive, i, j, k));
                    }
                    if leq.get(i, j) && wb.get(j, k) && !wb.get(i, k) {
                        return Some((Axiom::WayBelowCompatible, i, j, k));
                    }
                    if wb.get(i, j) && leq.get(j, k) && !wb.get(i, k) {
                        return Some((Axiom::WayBelowCompatible, i, j, k));
                    }
                    if leq.get(i, j) && !leq.get(sum_bb[i * n + k], sum_bb[j * n + k]) {
                        return Some((Axiom::AddMonotone, i, j, k));
                    }
                    None
                })
            })
        })
        .collect();
    for (ax, i, j, k) in triples {
        report.record(ax, vec![enc(&basis[i]), enc(&basis[j]), enc(&basis[k])]);
    }

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| wb.get(i, j))
        .collect();
    report.ll_pairs_checked = pairs.len();

    let additive_bad: Vec<((usize, usize), (usize, usize))> = pairs
        .par_iter()
        .flat_map_iter(|&(xp, x)| {
            let pairs = &pairs;
            let wb = &wb;
            let sum_bb = &sum_bb;
            pairs.iter().filter_map(move |&(yp, y)| {
                (!wb.get(sum_bb[xp * n + yp], sum_bb[x * n + y])).then_some(((xp, x), (yp, y)))
            })
        })
        .collect();
    for ((xp, x), (yp, y)) in additive_bad {
        report.record(
            Axiom::WayBelowAdditive,
            vec![enc(&basis[xp]), enc(&basis[x]), enc(&basis[yp]), enc(&basis[y])],
        );
    }

    for &(xp, x) in &pairs {
        match s.interpolate(&basis[xp], &basis[x]) {
            Some(z) if s.way_below(&basis[xp], &z) && s.way_below(&z, &basis[x]) => {}
            _ => report.record(Axiom::Interpolation, vec![enc(&basis[xp]), enc(&basis[x])]),
        }
    }
    report
}
