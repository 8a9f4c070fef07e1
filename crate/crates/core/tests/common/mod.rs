//! Generators and whole-criterion checks shared by the suites and the
//! acceptance runner. Every check panics on the first violation and returns a
//! one-line summary otherwise.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cufraisse::fraisse::*;
use cufraisse::hom::*;
use cufraisse::instances::softdim::Dim::{Compact, Infinity, Soft};
use cufraisse::instances::*;
use cufraisse::limit::*;
use cufraisse::metrics::*;
use cufraisse::pl::*;
use cufraisse::semigroup::compare_maps;
use cufraisse::{q, CuSemigroup, FiniteSubset, Q};

// ---------------------------------------------------------------- elementary

/// `E_n` listed as `0, 1, …, n, ∞`.
pub fn elems(n: u64) -> Vec<ExtNat> {
    (0..=n).map(Fin).chain([Inf]).collect()
}

fn sat_add(n: u64, a: ExtNat, b: ExtNat) -> ExtNat {
    match (a, b) {
        (Fin(x), Fin(y)) if x + y <= n => Fin(x + y),
        _ => Inf,
    }
}

pub fn le(a: ExtNat, b: ExtNat) -> bool {
    match (a, b) {
        (_, Inf) => true,
        (Inf, Fin(_)) => false,
        (Fin(x), Fin(y)) => x <= y,
    }
}

/// All tables `E_n → E_m` respecting addition, zero and order, found by
/// backtracking over the values in domain order; the way-below relation is
/// the order on both sides since every element is compact.
pub fn brute_morphisms(n: u64, m: u64) -> Vec<Vec<ExtNat>> {
    fn consistent(n: u64, m: u64, dom: &[ExtNat], t: &[ExtNat]) -> bool {
        let k = t.len();
        let idx = |x: ExtNat| dom.iter().position(|d| *d == x).unwrap();
        for i in 0..k {
            for j in 0..k {
                let s = idx(sat_add(n, dom[i], dom[j]));
                if s < k && t[s] != sat_add(m, t[i], t[j]) {
                    return false;
                }
                if le(dom[i], dom[j]) && !le(t[i], t[j]) {
                    return false;
                }
            }
        }
        k == 0 || t[0] == Fin(0)
    }
    fn go(n: u64, m: u64, dom: &[ExtNat], cod: &[ExtNat], t: &mut Vec<ExtNat>, out: &mut Vec<Vec<ExtNat>>) {
        if t.len() == dom.len() {
            out.push(t.clone());
            return;
        }
        for &v in cod {
            t.push(v);
            if consistent(n, m, dom, t) {
                go(n, m, dom, cod, t, out);
            }
            t.pop();
        }
    }
    let mut out = vec![];
    go(n, m, &elems(n), &elems(m), &mut vec![], &mut out);
    out
}

fn reflects_order(n: u64, t: &[ExtNat]) -> bool {
    let dom = elems(n);
    (0..dom.len()).all(|i| (0..dom.len()).all(|j| !le(t[i], t[j]) || le(dom[i], dom[j])))
}

fn table(h: &ElementaryHom) -> Vec<ExtNat> {
    elems(h.n).iter().map(|x| h.apply(x)).collect()
}

pub fn classification(max: u64) -> String {
    let mut maps = 0;
    for n in 1..=max {
        for m in 1..=max {
            let brute = brute_morphisms(n, m);
            maps += brute.len();
            let morph: BTreeSet<_> = elementary_enumerate(n, m, HomKind::Morphisms).iter().map(table).collect();
            assert_eq!(morph, brute.iter().cloned().collect(), "morphisms E_{n} -> E_{m}");
            let emb: BTreeSet<_> = elementary_enumerate(n, m, HomKind::Embeddings).iter().map(table).collect();
            let brute_emb: BTreeSet<_> = brute.into_iter().filter(|t| reflects_order(n, t)).collect();
            assert_eq!(emb, brute_emb, "embeddings E_{n} -> E_{m}");

            // embeddings are exactly 1 ↦ k with m/(n+1) < k ≤ m/n
            let ks: BTreeSet<ExtNat> = elementary_enumerate(n, m, HomKind::Embeddings).iter().map(|h| h.k).collect();
            let rule: BTreeSet<ExtNat> = (1..=m).filter(|k| m < k * (n + 1) && k * n <= m).map(Fin).collect();
            assert_eq!(ks, rule, "interval rule for E_{n} -> E_{m}");
        }
    }
    for n in 1..=max {
        let only = elementary_enumerate(n, n * (n + 1), HomKind::Embeddings);
        assert_eq!(only.iter().map(|h| h.k).collect::<Vec<_>>(), vec![Fin(n + 1)]);
    }
    format!("{maps} brute-force morphisms for n, m <= {max}, zero discrepancies")
}

pub fn obstruction() -> String {
    let start = Instant::now();
    let r = amalgamation_obstruction_search(4, 5, 6, 500).unwrap();
    let took = start.elapsed();
    assert!(r.found.is_none(), "{:?}", r.found);
    assert!(took < Duration::from_secs(10), "{took:?}");
    let c = interval_certificate(4, 5, 6);
    assert!(c.holds());
    // embeddings E_6 -> E_m are 1 ↦ k with 7k > m >= 6k; 4k and 5k stay finite
    for m in 1..=500u64 {
        let ks: Vec<u64> = (1..=m).filter(|k| 7 * k > m && 6 * k <= m).collect();
        for &k1 in &ks {
            for &k2 in &ks {
                assert_ne!(4 * k1, 5 * k2, "m = {m}");
            }
        }
    }
    format!("{} embedding pairs, none amalgamate; certificate holds; {:.2}s", r.pairs_tried, took.as_secs_f64())
}

// ---------------------------------------------------------------- Fraïssé limits

pub fn einf_limit() -> String {
    let cat = EInf;
    let a = build_fraisse_prefix(&cat, &DemandSchedule::new(1, 6), 12, 6).unwrap();
    let b = build_fraisse_prefix(&cat, &DemandSchedule::new(2, 6), 12, 6).unwrap();
    for pre in [&a, &b] {
        assert!(verify_prefix(&cat, pre).is_empty());
        assert!(pre.objects.len() >= 2);
        // every stage that has a successor sends its generator to an idempotent
        for i in 0..pre.last() {
            let s = cat.semigroup(&pre.objects[i + 1]);
            let x = cat.apply(&sigma(&cat, pre, i, i + 1), &Fin(1));
            assert_eq!(s.add(&x, &x), x, "stage {i}");
            assert_ne!(x, Fin(0));
        }
    }
    let c = prefix_colimit(&cat, &a).unwrap();
    let mus: Vec<Hom<Elementary, TwoPoint>> = a
        .objects
        .iter()
        .map(|n| {
            Hom::new(cat.semigroup(n), Arc::new(TwoPoint), "sat", |x: &ExtNat| {
                if *x == Fin(0) {
                    Fin(0)
                } else {
                    Inf
                }
            })
        })
        .collect();
    let r = identify_colimit(&c, &TwoPoint, &mus, 6).unwrap();
    assert!(r.passed(), "{r:?}");
    let u = uniqueness_intertwine(&cat, &a, &b, 6, 6).unwrap();
    two_sided_induced(&u.forward, &u.backward, 6).unwrap();
    format!(
        "{} stages saturate; identified on {} pairs; two seeds intertwine",
        a.last() + b.last(),
        r.pairs_checked
    )
}

fn sp_stage_maps(cat: &Sp, p: &PrefixOf<Sp>) -> Vec<Hom<ExtNatSg, SoftDim>> {
    let target = Arc::new(SoftDim::new(cat.p).unwrap());
    let mut e = 0u32;
    let mut out = vec![];
    for i in 0..p.objects.len() {
        let (pp, ee) = (cat.p, e);
        out.push(Hom::new(Arc::new(ExtNatSg), target.clone(), format!("mu{i}"), move |x: &ExtNat| {
            softdim_embed_stage(pp, ee, *x)
        }));
        if i < p.connecting.len() {
            e += p.connecting[i];
        }
    }
    out
}

/// `x_c + x_s = 2x_s` and `x_s ≤ x_c ≪ x_c ≤ x_s + ε` on random `p`-adic values.
fn mixed_rules(p: u64, samples: usize, seed: u64) {
    let s = SoftDim::new(p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pp = p as i64;
    for _ in 0..samples {
        let x = Q::new(rng.gen_range(1..200), pp.pow(rng.gen_range(0..4)));
        let eps = Q::new(1, pp.pow(rng.gen_range(0..8)));
        let (xc, xs) = (s.compact(x.clone()).unwrap(), s.soft(x.clone()).unwrap());
        assert_eq!(s.add(&xc, &xs), s.soft(&x * &Q::int(2)).unwrap());
        assert!(s.leq(&xs, &xc) && !s.leq(&xc, &xs));
        assert!(s.way_below(&xc, &xc) && !s.way_below(&xs, &xs));
        assert!(s.leq(&xc, &s.soft(&x + &eps).unwrap()));
        assert_eq!(xc, Compact(x.clone()));
        assert_eq!(xs, Soft(x));
    }
}

pub fn sp_limits() -> String {
    let mut pairs = vec![];
    for p in [2, 3] {
        let cat = Sp::new(p).unwrap();
        let pre = build_fraisse_prefix(&cat, &DemandSchedule::new(1, 4), 12, 6).unwrap();
        assert!(verify_prefix(&cat, &pre).is_empty());
        let c = prefix_colimit(&cat, &pre).unwrap();
        let mus = sp_stage_maps(&cat, &pre);
        let r = identify_colimit(&c, &SoftDim::new(p).unwrap(), &mus, 3).unwrap();
        assert!(r.pairs_checked >= 200, "{}", r.pairs_checked);
        assert!(r.passed(), "{r:?}");
        mixed_rules(p, 500, p);
        pairs.push(r.pairs_checked);
    }
    format!("S_2 / S_3 identified on {} / {} pairs; mixed rules on 1000 samples", pairs[0], pairs[1])
}

pub fn ep_limits() -> String {
    let mut pairs = vec![];
    for p in [2u64, 3] {
        let cat = Ep::new(p).unwrap();
        let pre = build_fraisse_prefix(&cat, &DemandSchedule::new(3, 6), 12, 4).unwrap();
        let c = prefix_colimit(&cat, &pre).unwrap();
        let t = Arc::new(TruncatedEp::new(p).unwrap());
        let mus: Vec<_> = pre
            .objects
            .iter()
            .map(|k| {
                let (t2, k) = (t.clone(), *k);
                Hom::new(cat.semigroup(&k), t.clone(), "mu", move |x: &ExtNat| t2.embed_stage(k, *x))
            })
            .collect();
        let r = identify_colimit(&c, t.as_ref(), &mus, 6).unwrap();
        assert!(r.passed(), "{r:?}");
        // x + y = ∞ once the sum passes the unit
        let basis = t.basis(3);
        for x in &basis {
            for y in &basis {
                if let (Some(a), Some(b)) = (x.value(), y.value()) {
                    if a + b > Q::one() {
                        assert_eq!(t.add(x, y), Infinity, "{x:?} + {y:?}");
                    }
                }
            }
        }
        pairs.push(r.pairs_checked);
    }
    format!("e_2 / e_3 identified on {} / {} pairs at depth 6", pairs[0], pairs[1])
}

// ---------------------------------------------------------------- PL and K_P

pub fn f8() -> &'static FiniteSubset<StepLsc> {
    static F8: OnceLock<FiniteSubset<StepLsc>> = OnceLock::new();
    F8.get_or_init(|| FiniteSubset::new(&LscInterval, LscInterval::grid_family(8)))
}

/// Random rational breakpoints `0 = b_0 < … < b_k = 1`.
pub fn breaks(rng: &mut ChaCha8Rng, k: usize) -> Vec<Q> {
    let mut inner: Vec<i64> = vec![];
    while inner.len() < k - 1 {
        let v = rng.gen_range(1..64);
        if !inner.contains(&v) {
            inner.push(v);
        }
    }
    inner.sort();
    std::iter::once(Q::zero()).chain(inner.into_iter().map(|v| Q::new(v, 64))).chain([Q::one()]).collect()
}

/// A piecewise strictly monotone surjection fixing `0` and `1`, with at most
/// `max_breaks` breakpoints.
pub fn climbable(rng: &mut ChaCha8Rng, max_breaks: usize) -> PlMap {
    let k = rng.gen_range(1..max_breaks - 1);
    let mut vals = vec![Q::zero()];
    for _ in 1..k {
        loop {
            let v = Q::new(rng.gen_range(0..=12), 12);
            if v != *vals.last().unwrap() {
                vals.push(v);
                break;
            }
        }
    }
    if *vals.last().unwrap() == Q::one() {
        vals.push(q(1, 2));
    }
    vals.push(Q::one());
    let b = breaks(rng, vals.len() - 1);
    PlMap::new(b, vals).unwrap()
}

/// A surjection of `[0,1]` onto itself, possibly with flat pieces and free
/// endpoints.
pub fn surjection(rng: &mut ChaCha8Rng, pieces: std::ops::RangeInclusive<usize>) -> PlMap {
    let pieces = rng.gen_range(pieces);
    let mut vals: Vec<Q> = (0..=pieces).map(|_| Q::new(rng.gen_range(0..=8), 8)).collect();
    let lo = rng.gen_range(0..=pieces);
    let hi = (lo + rng.gen_range(1..=pieces)) % (pieces + 1);
    vals[lo] = Q::zero();
    vals[hi] = Q::one();
    let b = breaks(rng, pieces);
    PlMap::new(b, vals).unwrap()
}

/// A surjective map of `[0,1]` with values on the grid `1/den`, uniform breaks.
pub fn random_pl(rng: &mut ChaCha8Rng, pieces: usize, den: i64) -> PlMap {
    let mut vals: Vec<Q> = (0..=pieces).map(|_| Q::new(rng.gen_range(0..=den), den)).collect();
    let lo = rng.gen_range(0..=pieces);
    let hi = (lo + rng.gen_range(1..=pieces)) % (pieces + 1);
    vals[lo] = Q::zero();
    vals[hi] = Q::one();
    PlMap::uniform(vals).unwrap()
}

/// `h` moved by at most `spread/den` at each node other than its extreme ones.
pub fn nearby_pl(rng: &mut ChaCha8Rng, h: &PlMap, spread: i64, den: i64) -> PlMap {
    let vals = h
        .values()
        .iter()
        .map(|v| {
            if v.is_zero() || *v == Q::one() {
                return v.clone();
            }
            let d = Q::new(rng.gen_range(-spread..=spread), den);
            (v + &d).max(Q::zero()).min(Q::one())
        })
        .collect();
    PlMap::new(h.breaks().to_vec(), vals).unwrap()
}

pub fn mountain_climbing(pairs: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    for _ in 0..pairs {
        let (f1, f2) = (climbable(&mut rng, 8), climbable(&mut rng, 8));
        assert!(f1.breaks().len() <= 8 && f2.breaks().len() <= 8);
        let (g1, g2) = mountain_climb(&f1, &f2).unwrap();
        let (l, r) = (f1.compose(&g1), f2.compose(&g2));
        assert_eq!(l.normalized(), r.normalized(), "{f1:?} {f2:?}");
        for g in [&g1, &g2] {
            assert!(g.is_surjective() && g.maps_into_unit());
        }
        // pointwise, away from the composition routine
        for _ in 0..20 {
            let t = Q::new(rng.gen_range(0..=1000), 1000);
            assert_eq!(f1.eval(&g1.eval(&t)), f2.eval(&g2.eval(&t)));
        }
    }
    let took = start.elapsed();
    assert!(took < Duration::from_secs(30), "{took:?}");
    format!("{pairs}/{pairs} exact equalities in {:.2}s", took.as_secs_f64())
}

pub fn kp_near_amalgamation(pairs: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = f8();
    for _ in 0..pairs {
        let a1 = surjection(&mut rng, 1..=4);
        let a2 = surjection(&mut rng, 1..=4);
        let am = amalgamate(&KPseudoArc, &a1, &a2, f, 4).unwrap();
        // β_i ∘ α_i is pull-back along α_i ∘ β_i
        let left = pl_induced_morphism(&a1).unwrap().then(&pl_induced_morphism(&am.beta1).unwrap());
        let right = pl_induced_morphism(&a2).unwrap().then(&pl_induced_morphism(&am.beta2).unwrap());
        assert!(left.compare_on(&right, f).unwrap(), "{a1:?} {a2:?}");
        assert!(am.closed_form);
        assert_eq!(KPseudoArc.compose(&am.beta1, &a1), a1.compose(&am.beta1));
    }
    format!("{pairs}/{pairs} certificates over F_8 ({} elements)", f.len())
}

/// Grid comparison against the sup distance and the grid metric, both ways.
pub fn grid_bridge(trials: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = vec![];
    for n in [2u64, 4, 8] {
        let fam = FiniteSubset::new(&LscInterval, LscInterval::grid_family(n));
        let (mut forward, mut backward, mut apart) = (0, 0, 0);
        for trial in 0..trials {
            let h = surjection(&mut rng, 4..=4);
            let g = if trial % 4 == 3 {
                surjection(&mut rng, 4..=4)
            } else {
                nearby_pl(&mut rng, &h, (trial % 12) as i64, 4 * n as i64)
            };
            let (ah, ag) = (pl_induced_morphism(&h).unwrap(), pl_induced_morphism(&g).unwrap());
            let d = pl_sup_distance(&h, &g);
            let compares = ah.compare_on(&ag, &fam).unwrap();
            if compares {
                forward += 1;
                assert!(d <= Q::new(2, n as i64), "n = {n}: {h:?} {g:?}");
                assert!(lsc_metric(&h, &g, 4 * n).unwrap() <= Q::new(2, n as i64));
            }
            if d <= Q::new(1, n as i64) {
                backward += 1;
                assert!(compares, "n = {n}: {h:?} {g:?}");
            }
            if !compares {
                apart += 1;
            }
        }
        // at n = 2 every pair compares and the bound 2/n = 1 is vacuous
        assert!(forward >= 10 && backward >= 10 && (n == 2 || apart >= 5), "{forward} {backward} {apart}");
        hits.push(format!("n={n}: {forward}/{backward}/{apart}"));
    }
    format!("bridge hits (compare/close/apart) {}", hits.join(", "))
}

// ---------------------------------------------------------------- K_Cantor

/// All `{0, 1, ∞}`-vectors of length `r`.
pub fn vectors(r: usize) -> Vec<Vec<ExtNat>> {
    let vals = [Fin(0), Fin(1), Inf];
    (0..3usize.pow(r as u32))
        .map(|mut c| {
            (0..r)
                .map(|_| {
                    let d = c % 3;
                    c /= 3;
                    vals[d]
                })
                .collect()
        })
        .collect()
}

/// Every function `[s] → [r]` in lexicographic order.
pub fn functions(s: usize, r: usize) -> Vec<Vec<usize>> {
    (0..r.pow(s as u32))
        .map(|mut c| {
            (0..s)
                .map(|_| {
                    let d = c % r;
                    c /= r;
                    d
                })
                .collect()
        })
        .collect()
}

fn vec_leq(a: &[ExtNat], b: &[ExtNat]) -> bool {
    a.iter().zip(b).all(|(x, y)| le(*x, *y))
}

pub fn cantor_amalgams(max_rank: usize) -> usize {
    let cat = KCantor;
    let mut triples = 0;
    for r in 1..=max_rank {
        let f = FiniteSubset::basis(cat.semigroup(&r).as_ref(), 2);
        let vs = vectors(r);
        for s1 in r..=max_rank {
            for s2 in r..=max_rank {
                for a1 in cat.homs(&r, &s1, 8) {
                    for a2 in cat.homs(&r, &s2, 8) {
                        let am = amalgamate(&cat, &a1, &a2, &f, 8).unwrap();
                        assert!(am.closed_form);
                        assert_eq!(cat.compose(&am.beta1, &a1), cat.compose(&am.beta2, &a2));
                        assert!(agree_exactly(&cat, (&am.beta1, &a1), (&am.beta2, &a2), &vs));
                        // the duals form a commuting square of surjections
                        assert!(CantorMor::new(am.beta1.f.clone(), s1).is_ok());
                        assert!(CantorMor::new(am.beta2.f.clone(), s2).is_ok());
                        for c in 0..am.object {
                            assert_eq!(a1.f[am.beta1.f[c]], a2.f[am.beta2.f[c]]);
                        }
                        triples += 1;
                    }
                }
            }
        }
    }
    for a in 1..=max_rank {
        for b in 1..=max_rank {
            let j = check_jep(&cat, &a, &b, 8).unwrap();
            assert_eq!((cat.dom(&j.left), cat.dom(&j.right)), (a, b));
            assert_eq!((cat.cod(&j.left), cat.cod(&j.right)), (j.object, j.object));
            assert!(CantorMor::new(j.left.f.clone(), a).is_ok());
            assert!(CantorMor::new(j.right.f.clone(), b).is_ok());
        }
    }
    triples
}

pub fn duality(max_rank: usize) -> usize {
    let mut checked = 0;
    for r in 1..=max_rank {
        for s in 1..=max_rank {
            let vs = vectors(r);
            for f in functions(s, r) {
                let m = SimplicialHom::from_function(&f, r).unwrap();
                assert!(simplicial_maps_one_to_one(&m));
                let d = lsc_dual_map(&m).unwrap();
                assert_eq!(d.map, f);
                assert_eq!(d.codomain_size, r);
                let onto = (0..r).all(|j| f.contains(&j));
                assert_eq!(d.surjective, onto);
                assert_eq!(simplicial_is_embedding(&m), onto, "{f:?}");
                if r <= 3 {
                    // order reflection of x ↦ x ∘ f, checked on vectors
                    let reflects = vs
                        .iter()
                        .all(|x| vs.iter().all(|y| !vec_leq(&m.apply(x), &m.apply(y)) || vec_leq(x, y)));
                    assert_eq!(reflects, onto, "{f:?}");
                }
                checked += 1;
            }
        }
    }
    checked
}

pub fn unital_maps_are_functions() -> usize {
    let vals = [Fin(0), Fin(1), Fin(2), Inf];
    let mut unital_count = 0;
    for r in 1..=2usize {
        for s in 1..=2usize {
            for mut c in 0..4usize.pow((r * s) as u32) {
                let entries: Vec<Vec<ExtNat>> = (0..s)
                    .map(|_| {
                        (0..r)
                            .map(|_| {
                                let d = c % 4;
                                c /= 4;
                                vals[d]
                            })
                            .collect()
                    })
                    .collect();
                let m = SimplicialHom::new(entries.clone(), r).unwrap();
                let unital = m.apply(&vec![Fin(1); r]) == vec![Fin(1); s];
                assert_eq!(lsc_dual_map(&m).is_ok(), unital, "{entries:?}");
                if unital {
                    let d = lsc_dual_map(&m).unwrap();
                    assert_eq!(SimplicialHom::from_function(&d.map, r).unwrap(), m);
                    unital_count += 1;
                }
            }
        }
    }
    unital_count
}

pub fn cantor_exactness() -> String {
    let triples = cantor_amalgams(4);
    let maps = duality(5);
    let unital = unital_maps_are_functions();
    format!("{triples} exact amalgams and 16 joins (ranks <= 4); {maps} dual maps; {unital} unital matrices")
}

// ---------------------------------------------------------------- Cauchy limits

pub const LIMIT_DEPTH: usize = 6;

/// Builds both limits, checks they agree on the depth-6 basis and that each
/// one is a limit of the sequence there.
pub fn check_unique<S, T>(seq: &MorphismSequence<S, T>, other: (Enumeration, usize), expect: &Hom<S, T>)
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    let dom = seq.domain().clone();
    let cod = seq.maps[0].cod().clone();
    let a = Arc::new(cauchy_limit(seq, LIMIT_DEPTH, Enumeration::Direct).unwrap());
    let b = Arc::new(cauchy_limit(seq, other.1, other.0).unwrap());
    let basis = FiniteSubset::basis(dom.as_ref(), LIMIT_DEPTH);
    for x in &basis.elements {
        let ((va, ta), (vb, tb)) = (a.eval_tagged(x), b.eval_tagged(x));
        if ta != LimitTag::DepthBounded && tb != LimitTag::DepthBounded {
            assert_eq!(va, vb, "{x:?}");
        }
        if ta != LimitTag::DepthBounded {
            assert_eq!(va, expect.apply(x), "{x:?}");
        }
    }
    assert!(compare_maps(cod.as_ref(), |x| a.eval(x), |x| b.eval(x), &basis));
    assert!(compare_maps(cod.as_ref(), |x| a.eval(x), |x| expect.apply(x), &basis));
    for lim in [&a, &b] {
        assert!(converges_to(seq, &lim.to_hom(), &basis).is_some());
    }
}

/// Random maps followed by a constant tail at least as long.
fn settle<T: Clone>(noise: Vec<T>, tail: T) -> Vec<T> {
    let n = noise.len();
    noise.into_iter().chain(std::iter::repeat_n(tail, n + 2)).collect()
}

pub fn elementary_sequences() -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..4 {
        let (n, m) = (rng.gen_range(1..7), rng.gen_range(1..13));
        let homs = elementary_enumerate(n, m, HomKind::Morphisms);
        let mut pick = || homs[rng.gen_range(0..homs.len())].to_hom();
        let noise = (0..3).map(|_| pick()).collect();
        let last = pick();
        let seq = MorphismSequence::new(settle(noise, last.clone())).unwrap();
        check_unique(&seq, (Enumeration::Odd, 3), &last);
    }
    4
}

fn times(k: ExtNat) -> Hom<ExtNatSg, ExtNatSg> {
    let s = Arc::new(ExtNatSg);
    Hom::new(s.clone(), s, format!("x{k}"), move |x: &ExtNat| *x * k)
}

pub fn extended_naturals() -> usize {
    let cases = [(vec![Fin(1), Fin(5)], Fin(2)), (vec![Inf, Fin(0), Fin(3)], Fin(7)), (vec![Fin(4)], Inf)];
    for (noise, k) in cases {
        let seq = MorphismSequence::new(settle(noise.into_iter().map(times).collect(), times(k))).unwrap();
        check_unique(&seq, (Enumeration::Odd, 3), &times(k));
    }
    3
}

pub fn simplicial_matrices() -> usize {
    let m = |rows: [[u64; 2]; 2]| {
        let e = rows.iter().map(|r| r.iter().map(|&v| if v == 9 { Inf } else { Fin(v) }).collect()).collect();
        SimplicialHom::new(e, 2).unwrap().to_hom()
    };
    let cases = [
        (vec![m([[1, 0], [0, 1]])], m([[0, 1], [1, 0]])),
        (vec![m([[2, 1], [0, 9]]), m([[0, 0], [1, 1]])], m([[1, 1], [0, 2]])),
        (vec![m([[9, 0], [0, 0]])], m([[1, 0], [1, 0]])),
    ];
    for (noise, last) in cases {
        let seq = MorphismSequence::new(settle(noise, last.clone())).unwrap();
        check_unique(&seq, (Enumeration::Odd, 3), &last);
    }
    3
}

pub fn soft_dimension_scalings() -> usize {
    let cases = [
        (vec![q(3, 1), q(1, 4)], q(1, 2)),
        (vec![q(5, 8)], q(3, 1)),
        (vec![q(1, 16), q(2, 1)], q(3, 4)),
        (vec![q(1, 1)], q(1, 8)),
    ];
    for (noise, f) in cases {
        let maps = noise.into_iter().map(|c| SoftScale::new(2, c).unwrap().to_hom()).collect();
        let last = SoftScale::new(2, f).unwrap().to_hom();
        let seq = MorphismSequence::new(settle(maps, last.clone())).unwrap();
        check_unique(&seq, (Enumeration::Odd, 3), &last);
    }
    4
}

/// Least common multiple of the denominators of `qs`.
fn grid<'a>(qs: impl Iterator<Item = &'a Q>) -> i64 {
    qs.map(|t| t.denom().to_i64().unwrap()).fold(1, num_integer::lcm)
}

/// Least `i` with `c·2^-i < 1/grid`.
fn geometric_index(c: &Q, grid: i64) -> usize {
    (0..).find(|&i| c / Q::int(1 << i) < Q::new(1, grid)).unwrap()
}

/// `0 ↦ 0`, `1/2 ↦ 1/2 + d`, `1 ↦ 1`.
fn bend(d: &Q) -> ChainMap {
    ChainMap::new(PlMap::uniform(vec![Q::zero(), q(1, 2) + d, Q::one()]).unwrap()).unwrap()
}

pub fn generator_sequences() -> usize {
    type Family = fn(&Q) -> ChainMap;
    let families: [(Family, Q); 4] =
        [(ChainMap::shift, q(1, 1)), (ChainMap::shift, q(3, 4)), (bend, q(1, 4)), (bend, q(-1, 4))];
    for (family, c) in families {
        let maps: Vec<_> = (0..14).map(|i| family(&(&c / Q::int(1 << i))).to_hom()).collect();
        let cc = c.abs();
        let seq = MorphismSequence::new(maps).unwrap().with_modulus(move |f: &FiniteSubset<GElem>| {
            geometric_index(&cc, grid(f.elements.iter().flat_map(|x| x.levels())))
        });
        check_unique(&seq, (Enumeration::Even, 3), &ChainMap::identity().to_hom());
    }
    4
}

/// `h` with each interior node moved by `±c·2^-i`, kept inside `[0,1]`.
fn wobble(h: &PlMap, c: &Q, i: usize, rng: &mut ChaCha8Rng) -> PlMap {
    let d = c / Q::int(1 << i);
    let vals = h
        .values()
        .iter()
        .map(|v| {
            if v.is_zero() || *v == Q::one() {
                return v.clone();
            }
            let s = if rng.gen_bool(0.5) { d.clone() } else { -&d };
            (v + &s).max(Q::zero()).min(Q::one())
        })
        .collect();
    PlMap::new(h.breaks().to_vec(), vals).unwrap()
}

pub fn lsc_perturbations() -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let hs = [
        PlMap::uniform(vec![q(0, 1), q(1, 1), q(1, 3), q(2, 3)]).unwrap(),
        PlMap::uniform(vec![q(0, 1), q(3, 5), q(1, 5), q(1, 1), q(1, 2)]).unwrap(),
    ];
    for h in hs {
        let c = q(1, 4);
        let maps = (0..12).map(|i| pl_induced_morphism(&wobble(&h, &c, i, &mut rng)).unwrap()).collect();
        let seq = MorphismSequence::new(maps).unwrap().with_modulus(move |f: &FiniteSubset<StepLsc>| {
            // two wobbles differ by at most 2c·2^-i
            geometric_index(&q(1, 2), grid(f.elements.iter().flat_map(|x| x.nodes())))
        });
        check_unique(&seq, (Enumeration::Even, 3), &pl_induced_morphism(&h).unwrap());
    }
    2
}

pub fn cauchy_uniqueness() -> String {
    let n = elementary_sequences()
        + extended_naturals()
        + simplicial_matrices()
        + soft_dimension_scalings()
        + generator_sequences()
        + lsc_perturbations();
    format!("{n} sequences over 6 instances agree on the depth-6 basis")
}

// ---------------------------------------------------------------- metrics

fn elem(n: u64, code: u8) -> ExtNat {
    let k = code as u64 % (n + 2);
    if k == n + 1 {
        Inf
    } else {
        Fin(k)
    }
}

/// A step path into `E_n` with breaks on the grid `1/16`.
pub fn step_path(n: u64, cuts: &[u8], codes: &[u8]) -> StepPath<Elementary> {
    let e = Arc::new(Elementary::new(n).unwrap());
    let mut breaks: Vec<i64> = cuts.iter().map(|c| (*c % 16) as i64).collect();
    breaks.push(0);
    breaks.sort();
    breaks.dedup();
    let mut values: Vec<ExtNat> = codes.iter().cycle().take(breaks.len()).map(|c| elem(n, *c)).collect();
    values.sort_by(|a, b| b.cmp(a));
    StepPath::new(e, breaks.into_iter().map(|b| Q::new(b, 16)).collect(), values).unwrap()
}

pub fn random_step(rng: &mut ChaCha8Rng, n: u64) -> StepPath<Elementary> {
    let k = rng.gen_range(1..5);
    let cuts: Vec<u8> = (0..k).map(|_| rng.gen()).collect();
    let codes: Vec<u8> = (0..k + 1).map(|_| rng.gen()).collect();
    step_path(n, &cuts, &codes)
}

/// The full chain `0 ≪ 1 ≪ … ≪ n ≪ ∞` plus two coarser chains.
pub fn elementary_family(n: u64) -> GeneratingFamily<StepPath<Elementary>> {
    let e = Arc::new(Elementary::new(n).unwrap());
    let full: Vec<ExtNat> = (0..=n).map(Fin).chain([Inf]).collect();
    let paths = vec![
        path_from_chain(e.clone(), &full).unwrap(),
        path_from_chain(e.clone(), &[Fin(0), Inf]).unwrap(),
        path_from_chain(e, &[Fin(0), Fin(n.min(1)), Fin(n), Inf]).unwrap(),
    ];
    GeneratingFamily::new(paths).unwrap()
}

/// Symmetry, triangle inequality and separation for `d_G` and `d_Λ` on
/// `triples` random triples each.
pub fn metric_axioms(triples: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..triples {
        let n = rng.gen_range(1..5);
        let (u, v, w) = (random_step(&mut rng, n), random_step(&mut rng, n), random_step(&mut rng, n));
        let duv = d_g(&u, &v).unwrap();
        assert_eq!(duv, d_g(&v, &u).unwrap());
        assert!(d_g(&u, &w).unwrap() <= &duv + &d_g(&v, &w).unwrap(), "{u:?} {v:?} {w:?}");
        let same = (0..16).all(|j| u.value(&Q::new(j, 16)) == v.value(&Q::new(j, 16)));
        assert_eq!(duv.is_zero(), same);
    }
    for _ in 0..triples {
        let (n, m) = (rng.gen_range(1..5), rng.gen_range(1..7));
        let homs = elementary_enumerate(n, m, HomKind::Morphisms);
        let mut pick = || homs[rng.gen_range(0..homs.len())].to_hom();
        let (a, b, c) = (pick(), pick(), pick());
        let fam = elementary_family(n);
        let d = |x: &Hom<Elementary, Elementary>, y: &Hom<Elementary, Elementary>| d_lambda(x, y, &fam).unwrap().value;
        let dab = d(&a, &b);
        assert_eq!(dab, d(&b, &a));
        assert!(d(&a, &c) <= &dab + &d(&b, &c));
        let e = Elementary::new(n).unwrap();
        assert_eq!(dab.is_zero(), e.elements().iter().all(|x| a.apply(x) == b.apply(x)));
    }
    format!("{triples} d_G and {triples} d_Λ triples")
}

/// The shift table for `n ≤ 64` over `Λ = {λ_2, …, λ_128}`.
pub fn shift_table() -> Vec<ShiftRow> {
    shift_counterexample(64, 128).unwrap()
}

pub fn bridges_over_elementary(trials: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut used_i, mut used_ii) = (0, 0);
    for _ in 0..trials {
        let (n, m) = (rng.gen_range(1..6), rng.gen_range(1..8));
        let homs = elementary_enumerate(n, m, HomKind::Morphisms);
        let a = homs[rng.gen_range(0..homs.len())].to_hom();
        let b = homs[rng.gen_range(0..homs.len())].to_hom();
        let e = Elementary::new(n).unwrap();
        let fam = elementary_family(n);
        let d = d_lambda(&a, &b, &fam).unwrap().value;

        let f = FiniteSubset::new(&e, e.elements().into_iter().filter(|_| rng.gen_bool(0.5)));
        let eps_f = bridge_eps_for_set(&f, &fam).unwrap().eps;
        if d < eps_f {
            used_i += 1;
            assert!(a.compare_on(&b, &f).unwrap(), "(i) fails: d = {d}, ε_F = {eps_f}");
        }

        let eps = [q(1, 2), q(1, 3), q(1, 4), q(1, 8)][rng.gen_range(0..4)].clone();
        let fe = bridge_set_for_eps(&eps, &fam).unwrap();
        if a.compare_on(&b, &fe).unwrap() {
            used_ii += 1;
            assert!(d < eps, "(ii) fails: d = {d}, ε = {eps}");
        }
    }
    assert!(used_i > 10 && used_ii > 10, "{used_i} {used_ii}");
    (used_i, used_ii)
}

pub fn bridges_over_grid_lsc(trials: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fam = ball_family(8).unwrap();
    let pool = LscInterval::grid_family(4);
    let (mut used_i, mut used_ii) = (0, 0);
    for trial in 0..trials {
        let h = random_pl(&mut rng, 4, 8);
        let g = nearby_pl(&mut rng, &h, (trial % 3) as i64, 16);
        let d = d_lambda(&h, &g, &fam).unwrap().value;
        let (ah, ag) = (pl_induced_morphism(&h).unwrap(), pl_induced_morphism(&g).unwrap());

        let f = FiniteSubset::new(&LscInterval, (0..4).map(|_| pool[rng.gen_range(0..pool.len())].clone()));
        let eps_f = bridge_eps_for_set(&f, &fam).unwrap().eps;
        if d < eps_f {
            used_i += 1;
            assert!(ah.compare_on(&ag, &f).unwrap(), "(i) fails for {h:?} {g:?}");
        }

        let eps = [q(1, 2), q(1, 4)][trial % 2].clone();
        let fe = bridge_set_for_eps(&eps, &fam).unwrap();
        if ah.compare_on(&ag, &fe).unwrap() {
            used_ii += 1;
            assert!(d < eps, "(ii) fails: d = {d}, ε = {eps}");
        }
    }
    assert!(used_i > 10 && used_ii > 10, "{used_i} {used_ii}");
    (used_i, used_ii)
}

// ---------------------------------------------------------------- homogeneity

/// Checks both endpoint inequalities directly from the prefix.
fn endpoints_hold<C: FraisseCategory>(cat: &C, pre: &PrefixOf<C>, c: &CertificateOf<C>) -> bool {
    let host = cat.semigroup(&cat.dom(&c.alpha));
    let f = FiniteSubset::new(host.as_ref(), c.f.iter().cloned());
    let (s_lj, s_lj2) = (sigma(cat, pre, c.l, c.j), sigma(cat, pre, c.l, c.j2));
    let fw = compare_maps(
        cat.semigroup(&pre.objects[c.j]).as_ref(),
        |x| cat.apply(&s_lj, &cat.apply(&c.alpha, x)),
        |x| cat.apply(&c.nu, &cat.apply(&c.beta, x)),
        &f,
    );
    let bw = compare_maps(
        cat.semigroup(&pre.objects[c.j2]).as_ref(),
        |x| cat.apply(&c.mu, &cat.apply(&s_lj, &cat.apply(&c.alpha, x))),
        |x| cat.apply(&s_lj2, &cat.apply(&c.beta, x)),
        &f,
    );
    fw && bw
}

/// Ten random `(α, β, F)` with `α, β: C → S_l`, archived and replayed; a
/// reformatted and a tampered archive must both be rejected.
pub fn homogeneity_round<C: FraisseCategory>(cat: &C, pre: &PrefixOf<C>, sources: &[C::Obj], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut certificates = vec![];
    while certificates.len() < 10 {
        let l = rng.gen_range(0..pre.last());
        let c = sources[rng.gen_range(0..sources.len())].clone();
        let homs = cat.homs(&c, &pre.objects[l], 4);
        if homs.is_empty() {
            continue;
        }
        let (a, b) = (&homs[rng.gen_range(0..homs.len())], &homs[rng.gen_range(0..homs.len())]);
        let host = cat.semigroup(&c);
        let picked: Vec<_> = host.basis(2).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let f = FiniteSubset::new(host.as_ref(), picked);
        let cert = homogeneity_iso(cat, pre, a, b, &f, 2, 4).unwrap().certificate;
        assert!(cert.forward && cert.backward);
        assert!(endpoints_hold(cat, pre, &cert));
        certificates.push(cert);
    }
    let mut archive: ArchiveOf<C> = HomogeneityArchive { prefix: pre.clone(), certificates };
    let json = archive_to_json::<C>(&archive).unwrap();
    let r = replay_archive(cat, &json).unwrap();
    assert!(r.passed() && r.bit_exact && r.certificates == 10, "{r:?}");

    let spaced = json.replacen(',', ", ", 1);
    assert!(!replay_archive(cat, &spaced).unwrap().bit_exact);
    archive.certificates[0].forward = false;
    let tampered = archive_to_json::<C>(&archive).unwrap();
    assert!(!replay_archive(cat, &tampered).unwrap().passed());
}

pub fn homogeneity() -> String {
    let s2 = Sp::new(2).unwrap();
    let pre = build_fraisse_prefix(&s2, &DemandSchedule::new(5, 4), 12, 6).unwrap();
    homogeneity_round(&s2, &pre, &[()], 41);
    let pre = build_fraisse_prefix(&EInf, &DemandSchedule::new(1, 6), 12, 6).unwrap();
    homogeneity_round(&EInf, &pre, &[1, 2, 3], 42);
    "10 + 10 certificates (s_2, e_inf); archives replay bit-exact, tampering detected".into()
}
