//! Fraïssé categories of Cu-semigroups: joint embedding and near amalgamation
//! search, Fraïssé sequences built from a demand schedule, and the zig-zag
//! constructions behind uniqueness, universality and homogeneity.

mod categories;
mod obstruction;

use std::fmt::Debug;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CuError, Result};
use crate::hom::Hom;
use crate::limit::{colimit_make, FormalColimit, Intertwining};
use crate::semigroup::{compare_maps, n_refinement, CuSemigroup, FiniteSubset};

pub use categories::{
    direct_sum_sequence, is_retraction, CantorMor, EInf, ElemEmb, Ep, EpMor, KCantor, KPseudoArc,
    Retractable, SDim, Sp,
};
pub use obstruction::{
    amalgamation_obstruction_search, interval_certificate, IntervalCertificate, ObstructionReport,
};

/// Plain data usable as objects and morphisms of an enumerable category.
pub trait Datum:
    Clone + Eq + Ord + Debug + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

impl<T> Datum for T where
    T: Clone + Eq + Ord + Debug + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

pub type Elem<C> = <<C as FraisseCategory>::Sg as CuSemigroup>::Elem;
/// An object with two maps into it.
pub type Cospan<C> = (<C as FraisseCategory>::Obj, <C as FraisseCategory>::Mor, <C as FraisseCategory>::Mor);

/// A countable category of countably-based Cu-semigroups, presented by bounded
/// enumerations of objects and hom-sets.
pub trait FraisseCategory: Clone + Send + Sync + 'static {
    type Obj: Datum;
    type Mor: Datum;
    type Sg: CuSemigroup + 'static;

    fn name(&self) -> String;
    fn semigroup(&self, a: &Self::Obj) -> Arc<Self::Sg>;
    /// Objects in enumeration order, truncated by `bound`.
    fn objects(&self, bound: usize) -> Vec<Self::Obj>;
    /// `Hom(a, b)` in lexicographic order of the canonical encoding.
    fn homs(&self, a: &Self::Obj, b: &Self::Obj, bound: usize) -> Vec<Self::Mor>;
    fn dom(&self, f: &Self::Mor) -> Self::Obj;
    fn cod(&self, f: &Self::Mor) -> Self::Obj;
    fn apply(&self, f: &Self::Mor, x: &Elem<Self>) -> Elem<Self>;
    /// `g ∘ f`.
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Self::Mor;
    fn identity(&self, a: &Self::Obj) -> Self::Mor;

    /// A closed-form amalgamation `(C, β1, β2)` of `α1, α2` over `F`, if known.
    fn amalgamate_closed(
        &self,
        _a1: &Self::Mor,
        _a2: &Self::Mor,
        _f: &FiniteSubset<Elem<Self>>,
    ) -> Option<Result<Cospan<Self>>> {
        None
    }

    /// A closed-form joint embedding `(B, a → B, b → B)`, if known.
    fn join_closed(&self, _a: &Self::Obj, _b: &Self::Obj) -> Option<(Self::Obj, Self::Mor, Self::Mor)> {
        None
    }

    fn encode_mor(&self, f: &Self::Mor) -> String {
        format!("{f:?}")
    }

    fn to_hom(&self, f: &Self::Mor) -> Hom<Self::Sg, Self::Sg> {
        let (me, g) = (self.clone(), f.clone());
        Hom::new(
            self.semigroup(&self.dom(f)),
            self.semigroup(&self.cod(f)),
            self.encode_mor(f),
            move |x| me.apply(&g, x),
        )
    }
}

/// `β ∘ α ≃_F γ` where all three maps leave the object hosting `F`.
fn compare_mor<C: FraisseCategory>(
    cat: &C,
    lhs: (&C::Mor, &C::Mor),
    rhs: &C::Mor,
    f: &FiniteSubset<Elem<C>>,
) -> bool {
    let host = cat.semigroup(&cat.cod(rhs));
    compare_maps(
        host.as_ref(),
        |x| cat.apply(lhs.0, &cat.apply(lhs.1, x)),
        |x| cat.apply(rhs, x),
        f,
    )
}

fn compare_pair<C: FraisseCategory>(
    cat: &C,
    left: (&C::Mor, &C::Mor),
    right: (&C::Mor, &C::Mor),
    f: &FiniteSubset<Elem<C>>,
) -> bool {
    let host = cat.semigroup(&cat.cod(left.0));
    compare_maps(
        host.as_ref(),
        |x| cat.apply(left.0, &cat.apply(left.1, x)),
        |x| cat.apply(right.0, &cat.apply(right.1, x)),
        f,
    )
}

/// Whether two maps agree exactly on a finite set.
pub fn agree_exactly<C: FraisseCategory>(
    cat: &C,
    left: (&C::Mor, &C::Mor),
    right: (&C::Mor, &C::Mor),
    elems: &[Elem<C>],
) -> bool {
    elems.iter().all(|x| {
        cat.apply(left.0, &cat.apply(left.1, x)) == cat.apply(right.0, &cat.apply(right.1, x))
    })
}

/// A joint embedding witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Join<O, M> {
    pub object: O,
    pub left: M,
    pub right: M,
}

/// The first object `B` with `Hom(A1, B)` and `Hom(A2, B)` nonempty, preferring
/// a registered closed form.
pub fn check_jep<C: FraisseCategory>(
    cat: &C,
    a1: &C::Obj,
    a2: &C::Obj,
    bound: usize,
) -> Result<Join<C::Obj, C::Mor>> {
    if let Some((b, l, r)) = cat.join_closed(a1, a2) {
        return Ok(Join { object: b, left: l, right: r });
    }
    for b in cat.objects(bound) {
        let (h1, h2) = (cat.homs(a1, &b, bound), cat.homs(a2, &b, bound));
        if let (Some(l), Some(r)) = (h1.into_iter().next(), h2.into_iter().next()) {
            return Ok(Join { object: b, left: l, right: r });
        }
    }
    Err(CuError::Exhausted { bound, what: format!("joint embedding of {a1:?} and {a2:?}") })
}

/// A near amalgamation `β1 ∘ α1 ≃_F β2 ∘ α2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Amalgam<O, M> {
    pub object: O,
    pub beta1: M,
    pub beta2: M,
    /// Whether the witness came from the category's closed form.
    pub closed_form: bool,
}

/// Near amalgamation of `α1: A → B1` and `α2: A → B2` over `F ⊆ A`: the closed
/// form if one is registered (verified), otherwise the first witness in
/// enumeration order.
pub fn amalgamate<C: FraisseCategory>(
    cat: &C,
    a1: &C::Mor,
    a2: &C::Mor,
    f: &FiniteSubset<Elem<C>>,
    bound: usize,
) -> Result<Amalgam<C::Obj, C::Mor>> {
    if cat.dom(a1) != cat.dom(a2) {
        return Err(CuError::DomainMismatch {
            expected: format!("{:?}", cat.dom(a1)),
            found: format!("{:?}", cat.dom(a2)),
        });
    }
    let host = cat.semigroup(&cat.dom(a1)).name();
    if f.host != host {
        return Err(CuError::DomainMismatch { expected: host, found: f.host.clone() });
    }
    if let Some(res) = cat.amalgamate_closed(a1, a2, f) {
        let (object, beta1, beta2) = res?;
        if !compare_pair(cat, (&beta1, a1), (&beta2, a2), f) {
            return Err(CuError::MissingCertificate(format!(
                "closed-form amalgamation of {a1:?} and {a2:?} fails on F"
            )));
        }
        return Ok(Amalgam { object, beta1, beta2, closed_form: true });
    }
    let (b1, b2) = (cat.cod(a1), cat.cod(a2));
    for c in cat.objects(bound) {
        let h2 = cat.homs(&b2, &c, bound);
        for beta1 in cat.homs(&b1, &c, bound) {
            if let Some(beta2) = h2.iter().find(|b| compare_pair(cat, (&beta1, a1), (b, a2), f)) {
                return Ok(Amalgam { object: c, beta1, beta2: beta2.clone(), closed_form: false });
            }
        }
    }
    Err(CuError::Exhausted { bound, what: format!("amalgamation of {a1:?} and {a2:?}") })
}

/// One step of a demand schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Demand {
    /// Absorb the `a`-th morphism out of stage `n` over the depth-`k` basis.
    Hom { n: usize, a: usize, k: usize },
    /// Make the `index`-th object map into the sequence.
    Object { index: usize },
}

/// A seeded enumeration of demand triples `(n, a, k)` along the diagonals
/// `n + a + k = s`, with object demands interleaved every third step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandSchedule {
    pub seed: u64,
    pub max_k: usize,
}

impl DemandSchedule {
    pub fn new(seed: u64, max_k: usize) -> DemandSchedule {
        DemandSchedule { seed, max_k }
    }

    fn diagonal(&self, s: usize) -> Vec<Demand> {
        let mut d: Vec<Demand> = (0..=s)
            .flat_map(|n| (0..=s - n).map(move |a| (n, a, s - n - a)))
            .filter(|&(_, _, k)| k <= self.max_k)
            .map(|(n, a, k)| Demand::Hom { n, a, k })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ s as u64);
        d.shuffle(&mut rng);
        d
    }

    /// The first `steps` demands.
    pub fn take(&self, steps: usize) -> Vec<Demand> {
        let mut homs = (0..).flat_map(|s| self.diagonal(s));
        let mut objects = 0..;
        (0..steps)
            .map(|t| {
                if t % 3 == 2 {
                    Demand::Object { index: objects.next().expect("unbounded") }
                } else {
                    homs.next().expect("unbounded")
                }
            })
            .collect()
    }
}

/// `β ∘ α ≃_{B_k(S_n)} σ_{n,j}` for the `step`-th demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry<M> {
    pub step: usize,
    pub n: usize,
    pub alpha: M,
    pub k: usize,
    pub j: usize,
    pub beta: M,
}

/// An object demand met by a morphism into stage `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectEntry<O, M> {
    pub step: usize,
    pub object: O,
    pub j: usize,
    pub map: M,
}

/// A finite inductive sequence with its demand ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FraissePrefix<O, M> {
    pub category: String,
    pub objects: Vec<O>,
    pub connecting: Vec<M>,
    pub ledger: Vec<LedgerEntry<M>>,
    pub object_ledger: Vec<ObjectEntry<O, M>>,
    /// Demands whose stage or morphism did not exist when they came up.
    pub skipped: Vec<usize>,
}

impl<O: Datum, M: Datum> FraissePrefix<O, M> {
    pub fn last(&self) -> usize {
        self.objects.len() - 1
    }
}

pub type PrefixOf<C> = FraissePrefix<<C as FraisseCategory>::Obj, <C as FraisseCategory>::Mor>;

/// `σ_{i,j}` as a morphism of the category.
pub fn sigma<C: FraisseCategory>(cat: &C, p: &PrefixOf<C>, i: usize, j: usize) -> C::Mor {
    p.connecting[i..j]
        .iter()
        .fold(cat.identity(&p.objects[i]), |acc, s| cat.compose(s, &acc))
}

/// All morphisms out of `a` into enumerated objects, in enumeration order.
pub fn out_homs<C: FraisseCategory>(cat: &C, a: &C::Obj, bound: usize) -> Vec<C::Mor> {
    cat.objects(bound).iter().flat_map(|b| cat.homs(a, b, bound)).collect()
}

/// The prefix as a formal colimit of its semigroups.
pub fn prefix_colimit<C: FraisseCategory>(cat: &C, p: &PrefixOf<C>) -> Result<FormalColimit<C::Sg>> {
    colimit_make(p.connecting.iter().map(|m| cat.to_hom(m)).collect())
}

fn basis_set<C: FraisseCategory>(cat: &C, a: &C::Obj, k: usize) -> FiniteSubset<Elem<C>> {
    FiniteSubset::basis(cat.semigroup(a).as_ref(), k)
}

/// Runs the first `steps` demands of `schedule`, extending the sequence by one
/// amalgamation per morphism demand and by a joint embedding when an object
/// does not yet map into it.
pub fn build_fraisse_prefix<C: FraisseCategory>(
    cat: &C,
    schedule: &DemandSchedule,
    steps: usize,
    bound: usize,
) -> Result<PrefixOf<C>> {
    let start = cat
        .objects(bound)
        .into_iter()
        .next()
        .ok_or_else(|| CuError::Exhausted { bound, what: "objects".into() })?;
    let mut p = FraissePrefix {
        category: cat.name(),
        objects: vec![start],
        connecting: vec![],
        ledger: vec![],
        object_ledger: vec![],
        skipped: vec![],
    };
    for (step, demand) in schedule.take(steps).into_iter().enumerate() {
        match demand {
            Demand::Hom { n, a, k } => {
                if n > p.last() {
                    p.skipped.push(step);
                    continue;
                }
                let Some(alpha) = out_homs(cat, &p.objects[n], bound).into_iter().nth(a) else {
                    p.skipped.push(step);
                    continue;
                };
                let f = basis_set(cat, &p.objects[n], k);
                let s = sigma(cat, &p, n, p.last());
                let am = amalgamate(cat, &s, &alpha, &f, bound).map_err(|e| match e {
                    CuError::Exhausted { bound, what } => CuError::Exhausted {
                        bound,
                        what: format!("demand {step} (n={n}, a={a}, k={k}): {what}"),
                    },
                    other => other,
                })?;
                p.objects.push(am.object);
                p.connecting.push(am.beta1);
                p.ledger.push(LedgerEntry { step, n, alpha, k, j: p.last(), beta: am.beta2 });
            }
            Demand::Object { index } => {
                let objs = cat.objects(bound);
                let Some(obj) = objs.get(index % objs.len()).cloned() else {
                    p.skipped.push(step);
                    continue;
                };
                let last = p.last();
                if let Some(map) = cat.homs(&obj, &p.objects[last], bound).into_iter().next() {
                    p.object_ledger.push(ObjectEntry { step, object: obj, j: last, map });
                    continue;
                }
                let join = check_jep(cat, &p.objects[last], &obj, bound)?;
                p.objects.push(join.object);
                p.connecting.push(join.left);
                p.object_ledger.push(ObjectEntry { step, object: obj, j: p.last(), map: join.right });
            }
        }
    }
    Ok(p)
}

/// Problems found when re-checking a prefix.
pub fn verify_prefix<C: FraisseCategory>(cat: &C, p: &PrefixOf<C>) -> Vec<String> {
    let mut bad = vec![];
    if p.category != cat.name() || p.connecting.len() + 1 != p.objects.len() {
        bad.push("shape".to_string());
    }
    for (i, s) in p.connecting.iter().enumerate() {
        if cat.dom(s) != p.objects[i] || cat.cod(s) != p.objects[i + 1] {
            bad.push(format!("connecting map {i}"));
        }
    }
    for e in &p.ledger {
        let f = basis_set(cat, &p.objects[e.n], e.k);
        if !compare_mor(cat, (&e.beta, &e.alpha), &sigma(cat, p, e.n, e.j), &f) {
            bad.push(format!("ledger entry for demand {}", e.step));
        }
    }
    for e in &p.object_ledger {
        if cat.dom(&e.map) != e.object || cat.cod(&e.map) != p.objects[e.j] {
            bad.push(format!("object entry for demand {}", e.step));
        }
    }
    bad
}

/// A return map for `α: S_i → C`: `β: C → S_j` with `β ∘ α ≃_F σ_{i,j}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FraisseWitness<M> {
    pub j: usize,
    pub beta: M,
}

fn fraisse_step<C: FraisseCategory>(
    cat: &C,
    p: &PrefixOf<C>,
    i: usize,
    alpha: &C::Mor,
    f: &FiniteSubset<Elem<C>>,
    min_j: usize,
    bound: usize,
) -> Result<FraisseWitness<C::Mor>> {
    let c = cat.cod(alpha);
    for j in min_j..=p.last() {
        let s = sigma(cat, p, i, j);
        if let Some(beta) = cat
            .homs(&c, &p.objects[j], bound)
            .into_iter()
            .find(|b| compare_mor(cat, (b, alpha), &s, f))
        {
            return Ok(FraisseWitness { j, beta });
        }
    }
    Err(CuError::PrefixTooShort {
        reason: format!("no return map for {} out of stage {i}", cat.encode_mor(alpha)),
        required: p.objects.len() + 1,
    })
}

/// Searches stages `j ≥ i` for a return map of `α` over `F`.
pub fn verify_fraisse_property<C: FraisseCategory>(
    cat: &C,
    p: &PrefixOf<C>,
    i: usize,
    alpha: &C::Mor,
    f: &FiniteSubset<Elem<C>>,
    bound: usize,
) -> Result<FraisseWitness<C::Mor>> {
    if cat.dom(alpha) != p.objects[i] {
        return Err(CuError::DomainMismatch {
            expected: format!("{:?}", p.objects[i]),
            found: format!("{:?}", cat.dom(alpha)),
        });
    }
    fraisse_step(cat, p, i, alpha, f, i, bound)
}

/// A cross map from stage `from` of one sequence to stage `to` of another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg<M> {
    pub from: usize,
    pub to: usize,
    pub map: M,
}

/// The alternating maps of a zig-zag between two prefixes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZigZag<M> {
    pub forward: Vec<Leg<M>>,
    pub backward: Vec<Leg<M>>,
}

fn refine<C: FraisseCategory>(
    cat: &C,
    obj: &C::Obj,
    depth: usize,
    extra: Vec<Elem<C>>,
    order: usize,
) -> FiniteSubset<Elem<C>> {
    let s = cat.semigroup(obj);
    let base = FiniteSubset::new(s.as_ref(), s.basis(depth).into_iter().chain(extra));
    n_refinement(s.as_ref(), &base, order)
}

/// Alternates return maps between `p` and `q` starting from `first: S_i → T_j`.
/// Each comparison set is a 2-refinement of the stage basis together with the
/// images of the previous set along the path.
fn zigzag<C: FraisseCategory>(
    cat: &C,
    p: &PrefixOf<C>,
    q: &PrefixOf<C>,
    first: Leg<C::Mor>,
    depth: usize,
    bound: usize,
) -> ZigZag<C::Mor> {
    let mut z = ZigZag { forward: vec![first], backward: vec![] };
    let mut f = refine(cat, &p.objects[z.forward[0].from], depth, vec![], 2);
    loop {
        let a = z.forward.last().expect("nonempty").clone();
        let g_extra: Vec<_> = f.elements.iter().map(|x| cat.apply(&a.map, x)).collect();
        let g = refine(cat, &q.objects[a.to], depth, g_extra, 2);
        let Ok(w) = fraisse_step(cat, p, a.from, &a.map, &f, a.from + 1, bound) else {
            break;
        };
        z.backward.push(Leg { from: a.to, to: w.j, map: w.beta.clone() });
        let f_extra: Vec<_> = g.elements.iter().map(|x| cat.apply(&w.beta, x)).collect();
        f = refine(cat, &p.objects[w.j], depth, f_extra, 2);
        let Ok(v) = fraisse_step(cat, q, a.to, &w.beta, &g, a.to + 1, bound) else {
            break;
        };
        z.forward.push(Leg { from: w.j, to: v.j, map: v.beta });
    }
    z
}

/// Extends legs to every stage up to the last leg: stage `s` uses the first leg
/// starting at or after `s`, precomposed with `σ`.
fn legs_to_intertwining<C: FraisseCategory>(
    cat: &C,
    p: &PrefixOf<C>,
    q: &PrefixOf<C>,
    legs: &[Leg<C::Mor>],
    depth: usize,
) -> Result<Intertwining<C::Sg, C::Sg>> {
    let top = legs.iter().map(|l| l.from).max().unwrap_or(0);
    let mut phi = vec![];
    let mut maps = vec![];
    for s in 0..=top {
        let leg = legs.iter().find(|l| l.from >= s).expect("top leg exists");
        phi.push(leg.to);
        maps.push(cat.to_hom(&cat.compose(&leg.map, &sigma(cat, p, s, leg.from))));
    }
    let mut it = Intertwining::new(prefix_colimit(cat, p)?, prefix_colimit(cat, q)?, phi, maps)?;
    it.certify(depth)?;
    Ok(it)
}

/// Two-sided intertwining between prefixes of the same category, following the
/// zig-zag through the Fraïssé property on both sides.
pub struct UniquenessData<C: FraisseCategory> {
    pub zigzag: ZigZag<C::Mor>,
    pub forward: Intertwining<C::Sg, C::Sg>,
    pub backward: Intertwining<C::Sg, C::Sg>,
}

pub fn uniqueness_intertwine<C: FraisseCategory>(
    cat: &C,
    p: &PrefixOf<C>,
    q: &PrefixOf<C>,
    depth: usize,
    bound: usize,
) -> Result<UniquenessData<C>> {
    let first = (0..=q.last())
        .find_map(|j| {
            cat.homs(&p.objects[0], &q.objects[j], bound)
                .into_iter()
                .next()
                .map(|m| Leg { from: 0, to: j, map: m })
        })
        .ok_or_else(|| CuError::PrefixTooShort {
            reason: "no map out of the first stage".into(),
            required: q.objects.len() + 1,
        })?;
    let z = zigzag(cat, p, q, first, depth, bound);
    if z.backward.is_empty() {
        return Err(CuError::PrefixTooShort {
            reason: "zig-zag stopped before the first return map".into(),
            required: p.objects.len() + 1,
        });
    }
    // keep forward legs that are followed by a backward leg
    let fw: Vec<_> = z.forward[..z.backward.len()].to_vec();
    let forward = legs_to_intertwining(cat, p, q, &fw, depth)?;
    let backward = legs_to_intertwining(cat, q, p, &z.backward, depth)?;
    Ok(UniquenessData { zigzag: z, forward, backward })
}

/// A sequence of objects and connecting maps of the category, given directly.
pub fn sequence_prefix<C: FraisseCategory>(cat: &C, connecting: Vec<C::Mor>) -> Result<PrefixOf<C>> {
    let first = connecting
        .first()
        .ok_or_else(|| CuError::InvalidParameter("empty sequence".into()))?;
    let mut objects = vec![cat.dom(first)];
    for (i, m) in connecting.iter().enumerate() {
        if cat.dom(m) != objects[i] {
            return Err(CuError::DomainMismatch {
                expected: format!("{:?}", objects[i]),
                found: format!("{:?}", cat.dom(m)),
            });
        }
        objects.push(cat.cod(m));
    }
    Ok(FraissePrefix {
        category: cat.name(),
        objects,
        connecting,
        ledger: vec![],
        object_ledger: vec![],
        skipped: vec![],
    })
}

/// One-sided intertwining from `target` into the Fraïssé prefix `p`, built by
/// an amalgamation step followed by a return map at every stage.
pub fn universality_map<C: FraisseCategory>(
    cat: &C,
    p: &PrefixOf<C>,
    target: &PrefixOf<C>,
    depth: usize,
    bound: usize,
) -> Result<Intertwining<C::Sg, C::Sg>> {
    let first = (0..=p.last())
        .find_map(|j| {
            cat.homs(&target.objects[0], &p.objects[j], bound)
                .into_iter()
                .next()
                .map(|m| Leg { from: 0, to: j, map: m })
        })
        .ok_or_else(|| CuError::PrefixTooShort {
            reason: "no map out of the first target stage".into(),
            required: p.objects.len() + 1,
        })?;
    let mut legs = vec![first];
    for i in 0..target.last() {
        let a = legs[i].clone();
        let f = refine(cat, &target.objects[i], depth, vec![], 2);
        let am = amalgamate(cat, &a.map, &target.connecting[i], &f, bound)?;
        let g_extra: Vec<_> = f.elements.iter().map(|x| cat.apply(&a.map, x)).collect();
        let g = refine(cat, &p.objects[a.to], depth, g_extra, 2);
        let w = fraisse_step(cat, p, a.to, &am.beta1, &g, a.to, bound)?;
        legs.push(Leg { from: i + 1, to: w.j, map: cat.compose(&w.beta, &am.beta2) });
    }
    legs_to_intertwining(cat, target, p, &legs, depth)
}

/// Endpoint data of the homogeneity construction for `α, β: C → S_l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneityCertificate<O, M, E> {
    pub object: O,
    pub alpha: M,
    pub beta: M,
    pub l: usize,
    pub f: Vec<E>,
    /// The 4-refinement of `F` used for the amalgamation.
    pub f_refined: Vec<E>,
    pub j: usize,
    /// `ν_0 = δ ∘ γ2: S_l → S_j`.
    pub nu: M,
    pub j2: usize,
    /// `μ: S_j → S_{j2}` with `μ ∘ ν_0 ≃ σ_{l,j2}`.
    pub mu: M,
    /// `σ_{l,j} ∘ α ≃_F ν_0 ∘ β`.
    pub forward: bool,
    /// `μ ∘ σ_{l,j} ∘ α ≃_F σ_{l,j2} ∘ β`.
    pub backward: bool,
}

pub type CertificateOf<C> = HomogeneityCertificate<<C as FraisseCategory>::Obj, <C as FraisseCategory>::Mor, Elem<C>>;

pub struct HomogeneityData<C: FraisseCategory> {
    pub certificate: CertificateOf<C>,
    pub zigzag: ZigZag<C::Mor>,
}

fn check_endpoints<C: FraisseCategory>(cat: &C, p: &PrefixOf<C>, c: &CertificateOf<C>) -> (bool, bool) {
    let sem = cat.semigroup(&c.object);
    let f = FiniteSubset::new(sem.as_ref(), c.f.iter().cloned());
    let s_lj = sigma(cat, p, c.l, c.j);
    let fw = compare_pair(cat, (&s_lj, &c.alpha), (&c.nu, &c.beta), &f);
    let left = cat.compose(&c.mu, &s_lj);
    let bw = compare_pair(cat, (&left, &c.alpha), (&sigma(cat, p, c.l, c.j2), &c.beta), &f);
    (fw, bw)
}

/// Moves `β` onto `α` inside the prefix: amalgamate over a 4-refinement of `F`,
/// return into the sequence, and return once more.
pub fn homogeneity_iso<C: FraisseCategory>(
    cat: &C,
    p: &PrefixOf<C>,
    alpha: &C::Mor,
    beta: &C::Mor,
    f: &FiniteSubset<Elem<C>>,
    depth: usize,
    bound: usize,
) -> Result<HomogeneityData<C>> {
    let object = cat.dom(alpha);
    let l = p
        .objects
        .iter()
        .position(|o| *o == cat.cod(alpha))
        .ok_or_else(|| CuError::InvalidParameter("alpha does not land in the prefix".into()))?;
    if cat.dom(beta) != object || cat.cod(beta) != p.objects[l] {
        return Err(CuError::DomainMismatch {
            expected: format!("{object:?} -> {:?}", p.objects[l]),
            found: format!("{:?} -> {:?}", cat.dom(beta), cat.cod(beta)),
        });
    }
    let sem = cat.semigroup(&object);
    let f4 = n_refinement(sem.as_ref(), f, 4);
    let am = amalgamate(cat, alpha, beta, &f4, bound)?;
    let g_extra: Vec<_> = f4
        .elements
        .iter()
        .flat_map(|x| [cat.apply(alpha, x), cat.apply(beta, x)])
        .collect();
    let g = refine(cat, &p.objects[l], depth, g_extra, 2);
    let w = fraisse_step(cat, p, l, &am.beta1, &g, l, bound)?;
    let nu = cat.compose(&w.beta, &am.beta2);
    let h = n_refinement(cat.semigroup(&p.objects[l]).as_ref(), &g, 2);
    let back = fraisse_step(cat, p, l, &nu, &h, w.j, bound)?;
    let mut certificate = HomogeneityCertificate {
        object,
        alpha: alpha.clone(),
        beta: beta.clone(),
        l,
        f: f.elements.clone(),
        f_refined: f4.elements.clone(),
        j: w.j,
        nu: nu.clone(),
        j2: back.j,
        mu: back.beta,
        forward: false,
        backward: false,
    };
    (certificate.forward, certificate.backward) = check_endpoints(cat, p, &certificate);
    let zigzag = zigzag(cat, p, p, Leg { from: l, to: w.j, map: nu }, depth, bound);
    Ok(HomogeneityData { certificate, zigzag })
}

/// A self-contained record of a homogeneity run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "O: Datum, M: Datum, E: crate::semigroup::Element")]
pub struct HomogeneityArchive<O, M, E> {
    pub prefix: FraissePrefix<O, M>,
    pub certificates: Vec<HomogeneityCertificate<O, M, E>>,
}

pub type ArchiveOf<C> = HomogeneityArchive<<C as FraisseCategory>::Obj, <C as FraisseCategory>::Mor, Elem<C>>;

/// Outcome of replaying an archive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub prefix_problems: Vec<String>,
    pub certificates: usize,
    pub failed: Vec<usize>,
    pub bit_exact: bool,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.prefix_problems.is_empty() && self.failed.is_empty() && self.bit_exact
    }
}

pub fn archive_to_json<C: FraisseCategory>(a: &ArchiveOf<C>) -> Result<String> {
    serde_json::to_string(a).map_err(|e| CuError::Representation(e.to_string()))
}

/// Re-verifies every certificate of a serialized archive and checks that
/// re-serialization reproduces the input byte for byte.
pub fn replay_archive<C: FraisseCategory>(cat: &C, json: &str) -> Result<ReplayReport> {
    let a: ArchiveOf<C> = serde_json::from_str(json).map_err(|e| CuError::Representation(e.to_string()))?;
    let prefix_problems = verify_prefix(cat, &a.prefix);
    let failed = a
        .certificates
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let (fw, bw) = check_endpoints(cat, &a.prefix, c);
            !(fw && bw && c.forward && c.backward)
        })
        .map(|(i, _)| i)
        .collect();
    let again = archive_to_json::<C>(&a)?;
    Ok(ReplayReport { prefix_problems, certificates: a.certificates.len(), failed, bit_exact: again == json })
}
