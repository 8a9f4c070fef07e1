//! Cauchy sequences of morphisms and their limits, formal inductive colimits,
//! closed-form identification, and the maps induced by approximate
//! intertwinings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CuError, Result};
use crate::hom::Hom;
use crate::semigroup::{compare_maps, CuSemigroup, FiniteSubset};

type Modulus<E> = Arc<dyn Fn(&FiniteSubset<E>) -> usize + Send + Sync>;

/// A finite stretch `α_0, α_1, …` of a sequence of morphisms `S → T`.
pub struct MorphismSequence<S: CuSemigroup, T: CuSemigroup> {
    pub maps: Vec<Hom<S, T>>,
    modulus: Option<Modulus<S::Elem>>,
}

impl<S: CuSemigroup + 'static, T: CuSemigroup + 'static> MorphismSequence<S, T> {
    pub fn new(maps: Vec<Hom<S, T>>) -> Result<Self> {
        if maps.is_empty() {
            return Err(CuError::InvalidParameter("empty morphism sequence".into()));
        }
        Ok(MorphismSequence { maps, modulus: None })
    }

    /// Attaches a claimed Cauchy modulus `F ↦ i_F`; it is checked, not trusted.
    pub fn with_modulus(
        mut self,
        m: impl Fn(&FiniteSubset<S::Elem>) -> usize + Send + Sync + 'static,
    ) -> Self {
        self.modulus = Some(Arc::new(m));
        self
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn domain(&self) -> &Arc<S> {
        self.maps[0].dom()
    }

    fn compare(&self, j: usize, k: usize, f: &FiniteSubset<S::Elem>) -> bool {
        let (a, b) = (&self.maps[j], &self.maps[k]);
        compare_maps(a.cod().as_ref(), |x| a.apply(x), |x| b.apply(x), f)
    }

    /// The least `i` such that `α_j ≃_F α_k` for all `j, k ≥ i` in the stretch.
    pub fn tail_index(&self, f: &FiniteSubset<S::Elem>) -> usize {
        let n = self.len();
        let mut i = n - 1;
        // grow the tail leftwards while the new map compares with every later one
        while i > 0 && (i..n).all(|k| self.compare(i - 1, k, f)) {
            i -= 1;
        }
        i
    }
}

/// How the basis sets `B_0 ⊆ B_1 ⊆ …` of the domain are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Enumeration {
    /// `B_n = basis(n)`.
    Direct,
    /// `B_n = basis(2n + 1)`.
    Odd,
    /// `B_n = basis(2n)`.
    Even,
}

impl Enumeration {
    pub fn depth_of(self, n: usize) -> usize {
        match self {
            Enumeration::Direct => n,
            Enumeration::Odd => 2 * n + 1,
            Enumeration::Even => 2 * n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitTag {
    /// The chain of approximants is eventually constant.
    Exact,
    /// `s = ∞·y` with `y` compact; the value is `∞·α(y)`.
    InfMultiple,
    /// No closed-form supremum; the value of the last certified approximant.
    DepthBounded,
}

/// The limit of a Cauchy sequence, evaluated through the moduli `φ(n)`.
pub struct CauchyLimit<S: CuSemigroup, T: CuSemigroup> {
    maps: Vec<Hom<S, T>>,
    bases: Vec<FiniteSubset<S::Elem>>,
    /// `φ(n)` for `n = 0..=depth`, nondecreasing.
    pub phi: Vec<usize>,
    pub enumeration: Enumeration,
}

impl<S: CuSemigroup + 'static, T: CuSemigroup + 'static> CauchyLimit<S, T> {
    pub fn depth(&self) -> usize {
        self.phi.len() - 1
    }

    /// `ψ(x)`: the least `n` with `x ∈ B_n`, if any.
    pub fn psi(&self, x: &S::Elem) -> Option<usize> {
        self.bases.iter().position(|b| b.contains(x))
    }

    pub fn eval_tagged(&self, x: &S::Elem) -> (T::Elem, LimitTag) {
        let dom = self.maps[0].dom();
        let cod = self.maps[0].cod();
        let top = self.depth();
        if dom.is_compact(x) {
            let n = self.psi(x).unwrap_or(top);
            return (self.maps[self.phi[n]].apply(x), LimitTag::Exact);
        }
        let seed = self.bases[top]
            .elements
            .iter()
            .find(|y| dom.is_compact(y) && dom.inf_multiple(y) == *x);
        if let Some(y) = seed {
            let n = self.psi(y).unwrap_or(top);
            return (cod.inf_multiple(&self.maps[self.phi[n]].apply(y)), LimitTag::InfMultiple);
        }
        (self.maps[self.phi[top]].apply(x), LimitTag::DepthBounded)
    }

    pub fn eval(&self, x: &S::Elem) -> T::Elem {
        self.eval_tagged(x).0
    }

    pub fn to_hom(self: &Arc<Self>) -> Hom<S, T> {
        let me = self.clone();
        Hom::new(
            self.maps[0].dom().clone(),
            self.maps[0].cod().clone(),
            "lim",
            move |x| me.eval(x),
        )
    }
}

/// Limit of `seq` on the first `depth + 1` basis sets of the domain.
pub fn cauchy_limit<S, T>(
    seq: &MorphismSequence<S, T>,
    depth: usize,
    enumeration: Enumeration,
) -> Result<CauchyLimit<S, T>>
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    let dom = seq.domain().clone();
    let half = seq.len() / 2;
    let mut phi: Vec<usize> = vec![];
    let mut bases = vec![];
    for n in 0..=depth {
        let b = FiniteSubset::basis(dom.as_ref(), enumeration.depth_of(n));
        let i = match &seq.modulus {
            Some(m) => {
                let i = m(&b);
                if i >= seq.len() || (i..seq.len()).any(|k| !seq.compare(i, k, &b)) {
                    return Err(CuError::NotCauchy { depth: n, failing: format!("{:?}", b.elements) });
                }
                i
            }
            None => seq.tail_index(&b),
        };
        if i > half {
            return Err(CuError::NotCauchy { depth: n, failing: format!("{:?}", b.elements) });
        }
        phi.push(i.max(phi.last().copied().unwrap_or(0)));
        bases.push(b);
    }
    Ok(CauchyLimit { maps: seq.maps.clone(), bases, phi, enumeration })
}

/// The least `i` such that `α_j ≃_F α` for every `j ≥ i` in the stretch;
/// `None` if even the last map fails.
pub fn converges_to<S, T>(
    seq: &MorphismSequence<S, T>,
    limit: &Hom<S, T>,
    f: &FiniteSubset<S::Elem>,
) -> Option<usize>
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    let cod = limit.cod();
    let ok = |j: usize| {
        let a = &seq.maps[j];
        compare_maps(cod.as_ref(), |x| a.apply(x), |x| limit.apply(x), f)
    };
    let mut i = seq.len();
    while i > 0 && ok(i - 1) {
        i -= 1;
    }
    (i < seq.len()).then_some(i)
}

/// Three-valued answer of a depth-bounded decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

type Reflector<E> = Arc<dyn Fn(usize, &E, usize, &E) -> bool + Send + Sync>;

/// A finite inductive sequence `S_0 → S_1 → … → S_m`.
pub struct FormalColimit<S: CuSemigroup> {
    pub stages: Vec<Arc<S>>,
    /// `σ_{i,i+1}`.
    pub connecting: Vec<Hom<S, S>>,
    reflector: Option<(String, Reflector<S::Elem>)>,
}

impl<S: CuSemigroup> Clone for FormalColimit<S> {
    fn clone(&self) -> Self {
        FormalColimit {
            stages: self.stages.clone(),
            connecting: self.connecting.clone(),
            reflector: self.reflector.clone(),
        }
    }
}

/// An element `(i, x)` of a formal colimit.
pub type ColimitElem<E> = (usize, E);

pub fn colimit_make<S: CuSemigroup + 'static>(connecting: Vec<Hom<S, S>>) -> Result<FormalColimit<S>> {
    let Some(first) = connecting.first() else {
        return Err(CuError::InvalidParameter("a colimit needs at least one connecting map".into()));
    };
    let mut stages = vec![first.dom().clone()];
    for (i, s) in connecting.iter().enumerate() {
        if s.dom().name() != stages[i].name() {
            return Err(CuError::DomainMismatch { expected: stages[i].name(), found: s.dom().name() });
        }
        stages.push(s.cod().clone());
    }
    Ok(FormalColimit { stages, connecting, reflector: None })
}

impl<S: CuSemigroup + 'static> FormalColimit<S> {
    pub fn last(&self) -> usize {
        self.stages.len() - 1
    }

    /// Registers an exact order test `(i,x) ≤ (j,y)` coming from a closed-form
    /// identification; only such a test can produce `No`.
    pub fn with_reflector(
        mut self,
        label: impl Into<String>,
        f: impl Fn(usize, &S::Elem, usize, &S::Elem) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.reflector = Some((label.into(), Arc::new(f)));
        self
    }

    pub fn reflector_label(&self) -> Option<&str> {
        self.reflector.as_ref().map(|(l, _)| l.as_str())
    }

    /// `σ_{i,k}(x)`.
    pub fn push(&self, i: usize, k: usize, x: &S::Elem) -> S::Elem {
        debug_assert!(i <= k);
        self.connecting[i..k].iter().fold(x.clone(), |acc, s| s.apply(&acc))
    }

    /// `σ_{i,k}` as a morphism.
    pub fn sigma(&self, i: usize, k: usize) -> Hom<S, S> {
        self.connecting[i..k]
            .iter()
            .fold(Hom::identity(self.stages[i].clone()), |acc, s| acc.then(s))
    }

    fn stage_witness(&self, a: &ColimitElem<S::Elem>, b: &ColimitElem<S::Elem>, rel: Rel) -> bool {
        let start = a.0.max(b.0);
        (start..=self.last()).any(|k| {
            let (x, y) = (self.push(a.0, k, &a.1), self.push(b.0, k, &b.1));
            match rel {
                Rel::Leq => self.stages[k].leq(&x, &y),
                Rel::WayBelow => self.stages[k].way_below(&x, &y),
            }
        })
    }

    pub fn leq(&self, a: &ColimitElem<S::Elem>, b: &ColimitElem<S::Elem>) -> Tri {
        colimit_leq(self, a, b)
    }

    /// `Yes` when some stage has `σ(x) ≪ σ(y)`.
    pub fn way_below(&self, a: &ColimitElem<S::Elem>, b: &ColimitElem<S::Elem>) -> Tri {
        if self.stage_witness(a, b, Rel::WayBelow) {
            Tri::Yes
        } else {
            Tri::Unknown
        }
    }

    pub fn add(&self, a: &ColimitElem<S::Elem>, b: &ColimitElem<S::Elem>) -> ColimitElem<S::Elem> {
        let k = a.0.max(b.0);
        (k, self.stages[k].add(&self.push(a.0, k, &a.1), &self.push(b.0, k, &b.1)))
    }

    /// Stage elements `(i, x)` for `x` in the depth-`d` basis of `S_i`.
    pub fn basis(&self, i: usize, depth: usize) -> Vec<ColimitElem<S::Elem>> {
        self.stages[i].basis(depth).into_iter().map(|x| (i, x)).collect()
    }
}

#[derive(Clone, Copy)]
enum Rel {
    Leq,
    WayBelow,
}

/// `Yes` when `σ_{i,k}(x) ≤ σ_{j,k}(y)` at some stage `k`, `No` when a
/// registered closed form refutes the inequality, `Unknown` otherwise.
pub fn colimit_leq<S: CuSemigroup + 'static>(
    c: &FormalColimit<S>,
    a: &ColimitElem<S::Elem>,
    b: &ColimitElem<S::Elem>,
) -> Tri {
    if c.stage_witness(a, b, Rel::Leq) {
        return Tri::Yes;
    }
    match &c.reflector {
        Some((_, f)) if !f(a.0, &a.1, b.0, &b.1) => Tri::No,
        _ => Tri::Unknown,
    }
}

/// Outcome of comparing a formal colimit with a closed-form target.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifyReport {
    pub pairs_checked: usize,
    /// Stage-witnessed `≤` that the target denies.
    pub order_contradictions: Vec<String>,
    /// Target `≤` with no stage witness inside the prefix.
    pub unwitnessed: Vec<String>,
    /// Stage-witnessed `≪` that the target denies.
    pub way_below_mismatches: Vec<String>,
    pub sum_mismatches: Vec<String>,
}

impl IdentifyReport {
    pub fn passed(&self) -> bool {
        self.order_contradictions.is_empty()
            && self.unwitnessed.is_empty()
            && self.way_below_mismatches.is_empty()
            && self.sum_mismatches.is_empty()
    }
}

/// Checks that the stage maps `μ_i: S_i → T` commute with the connecting maps
/// and that order, `≪` and sums of the colimit agree with those of `T` on the
/// depth-`d` bases of all stages but the last.
pub fn identify_colimit<S, T>(
    c: &FormalColimit<S>,
    target: &T,
    stage_maps: &[Hom<S, T>],
    depth: usize,
) -> Result<IdentifyReport>
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    if stage_maps.len() != c.stages.len() {
        return Err(CuError::InvalidParameter(format!(
            "{} stage maps for {} stages",
            stage_maps.len(),
            c.stages.len()
        )));
    }
    for i in 0..c.last() {
        for x in c.stages[i].basis(depth) {
            let lhs = stage_maps[i + 1].apply(&c.connecting[i].apply(&x));
            let rhs = stage_maps[i].apply(&x);
            if lhs != rhs {
                return Err(CuError::Precondition(format!(
                    "stage maps do not commute at stage {i}: x = {}, mu_{}(sigma(x)) = {}, mu_{i}(x) = {}",
                    c.stages[i].encode(&x),
                    i + 1,
                    target.encode(&lhs),
                    target.encode(&rhs)
                )));
            }
        }
    }
    // the last stage has no successor to witness inequalities in, so it only
    // serves as a target for pushes
    let elems: Vec<ColimitElem<S::Elem>> = (0..c.last()).flat_map(|i| c.basis(i, depth)).collect();
    let image = |e: &ColimitElem<S::Elem>| stage_maps[e.0].apply(&e.1);
    let show = |e: &ColimitElem<S::Elem>| format!("({}, {})", e.0, c.stages[e.0].encode(&e.1));
    let mut report = IdentifyReport::default();
    for a in &elems {
        let ia = image(a);
        for b in &elems {
            report.pairs_checked += 1;
            let ib = image(b);
            let t_leq = target.leq(&ia, &ib);
            let witnessed = c.stage_witness(a, b, Rel::Leq);
            if witnessed && !t_leq {
                report.order_contradictions.push(format!("{} <= {}", show(a), show(b)));
            }
            if t_leq && !witnessed {
                report.unwitnessed.push(format!("{} <= {}", show(a), show(b)));
            }
            if c.stage_witness(a, b, Rel::WayBelow) && !target.way_below(&ia, &ib) {
                report.way_below_mismatches.push(format!("{} << {}", show(a), show(b)));
            }
            let s = c.add(a, b);
            if image(&s) != target.add(&ia, &ib) {
                report.sum_mismatches.push(format!("{} + {}", show(a), show(b)));
            }
        }
    }
    Ok(report)
}

/// One recorded approximate-commutation check: the square from stage `i` to
/// stage `j` commutes `≃_F` for `F` the depth-`depth` basis of `S_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareCertificate {
    pub i: usize,
    pub j: usize,
    pub depth: usize,
}

/// Cross maps `α_i: S_i → T_{φ(i)}` between two inductive sequences.
pub struct Intertwining<S: CuSemigroup, T: CuSemigroup> {
    pub source: FormalColimit<S>,
    pub target: FormalColimit<T>,
    pub phi: Vec<usize>,
    pub alpha: Vec<Hom<S, T>>,
    pub certificates: Vec<SquareCertificate>,
}

impl<S: CuSemigroup + 'static, T: CuSemigroup + 'static> Intertwining<S, T> {
    pub fn new(
        source: FormalColimit<S>,
        target: FormalColimit<T>,
        phi: Vec<usize>,
        alpha: Vec<Hom<S, T>>,
    ) -> Result<Self> {
        if phi.len() != alpha.len() || phi.is_empty() {
            return Err(CuError::InvalidParameter("phi and alpha must have equal nonzero length".into()));
        }
        if phi.windows(2).any(|w| w[0] > w[1]) || phi.iter().any(|&p| p > target.last()) {
            return Err(CuError::InvalidParameter("phi must be increasing within the target prefix".into()));
        }
        if alpha.len() > source.stages.len() {
            return Err(CuError::InvalidParameter("more cross maps than source stages".into()));
        }
        Ok(Intertwining { source, target, phi, alpha, certificates: vec![] })
    }

    /// Verifies `τ_{φ(i),φ(j)} ∘ α_i ≃_F α_j ∘ σ_{i,j}` for all `i < j` and
    /// records certificates; the first failing square is reported.
    pub fn certify(&mut self, depth: usize) -> Result<()> {
        self.certificates.clear();
        for i in 0..self.alpha.len() {
            let f = FiniteSubset::basis(self.source.stages[i].as_ref(), depth);
            for j in i + 1..self.alpha.len() {
                let cod = &self.target.stages[self.phi[j]];
                let ok = compare_maps(
                    cod.as_ref(),
                    |x| self.target.push(self.phi[i], self.phi[j], &self.alpha[i].apply(x)),
                    |x| self.alpha[j].apply(&self.source.push(i, j, x)),
                    &f,
                );
                if !ok {
                    return Err(CuError::MissingCertificate(format!(
                        "square {i} -> {j} does not commute on the depth-{depth} basis"
                    )));
                }
                self.certificates.push(SquareCertificate { i, j, depth });
            }
        }
        Ok(())
    }

    fn covers(&self, depth: usize) -> bool {
        let n = self.alpha.len();
        (0..n).all(|i| {
            (i + 1..n).all(|j| self.certificates.contains(&SquareCertificate { i, j, depth }))
        })
    }

    /// `α(i, x) = (φ(i), α_i(x))`, pushing `x` to the first stage with a cross map.
    pub fn apply(&self, e: &ColimitElem<S::Elem>) -> Result<ColimitElem<T::Elem>> {
        if e.0 >= self.alpha.len() {
            return Err(CuError::PrefixTooShort {
                reason: format!("no cross map out of stage {}", e.0),
                required: e.0 + 1,
            });
        }
        Ok((self.phi[e.0], self.alpha[e.0].apply(&e.1)))
    }
}

/// The morphism between colimits induced by a certified one-sided intertwining.
pub struct InducedMap<'a, S: CuSemigroup, T: CuSemigroup> {
    pub intertwining: &'a Intertwining<S, T>,
    pub depth: usize,
}

impl<'a, S: CuSemigroup + 'static, T: CuSemigroup + 'static> InducedMap<'a, S, T> {
    pub fn apply(&self, e: &ColimitElem<S::Elem>) -> Result<ColimitElem<T::Elem>> {
        self.intertwining.apply(e)
    }
}

/// Checks that the legs `α_j ∘ σ_{i,j}` agree in the target colimit for every
/// `≪`-pair of the stage bases, and returns the induced map.
pub fn one_sided_induced<S, T>(
    it: &Intertwining<S, T>,
    depth: usize,
) -> Result<InducedMap<'_, S, T>>
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    if !it.covers(depth) {
        return Err(CuError::MissingCertificate(format!("no certificates at depth {depth}")));
    }
    let n = it.alpha.len();
    for i in 0..n {
        let f = FiniteSubset::basis(it.source.stages[i].as_ref(), depth);
        for j in i..n {
            for (xp, x) in f.ll_pairs() {
                let a = it.apply(&(i, xp.clone()))?;
                let b = it.apply(&(j, it.source.push(i, j, x)))?;
                if colimit_leq(&it.target, &a, &b) != Tri::Yes {
                    return Err(CuError::MissingCertificate(format!(
                        "legs {i} and {j} disagree on a way-below pair at stage {i}"
                    )));
                }
                let a = it.apply(&(j, it.source.push(i, j, xp)))?;
                let b = it.apply(&(i, x.clone()))?;
                if colimit_leq(&it.target, &a, &b) != Tri::Yes {
                    return Err(CuError::MissingCertificate(format!(
                        "legs {j} and {i} disagree on a way-below pair at stage {i}"
                    )));
                }
            }
        }
    }
    Ok(InducedMap { intertwining: it, depth })
}

/// Verifies `β ∘ α ≃_F id` on the colimit of `it.source`: for `x' ≪ x` in the
/// depth-`d` basis of every stage from which both maps are defined,
/// `βα(x') ≤ x` and `x' ≤ βα(x)` are stage-witnessed.
fn round_trip<S, T>(it: &Intertwining<S, T>, back: &Intertwining<T, S>, depth: usize) -> Result<()>
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    let c = &it.source;
    // stages whose image lands where the way back is defined
    let stages: Vec<usize> = (0..it.alpha.len()).filter(|&i| it.phi[i] < back.alpha.len()).collect();
    if stages.is_empty() {
        return Err(CuError::PrefixTooShort {
            reason: "no stage admits a round trip".into(),
            required: it.phi[0] + 1,
        });
    }
    for i in stages {
        let f = FiniteSubset::basis(c.stages[i].as_ref(), depth);
        for (xp, x) in f.ll_pairs() {
            let rt = |y: &S::Elem| -> Result<ColimitElem<S::Elem>> { back.apply(&it.apply(&(i, y.clone()))?) };
            let (a, b) = (rt(xp)?, rt(x)?);
            let ok = colimit_leq(c, &a, &(i, x.clone())) == Tri::Yes
                && colimit_leq(c, &(i, xp.clone()), &b) == Tri::Yes;
            if !ok {
                return Err(CuError::MissingCertificate(format!(
                    "round trip through {} fails at stage {i} on {} << {}",
                    it.target.stages[0].name(),
                    c.stages[i].encode(xp),
                    c.stages[i].encode(x)
                )));
            }
        }
    }
    Ok(())
}

/// The isomorphism pair induced by a two-sided intertwining `(α, β)`.
pub fn two_sided_induced<'a, S, T>(
    forward: &'a Intertwining<S, T>,
    backward: &'a Intertwining<T, S>,
    depth: usize,
) -> Result<(InducedMap<'a, S, T>, InducedMap<'a, T, S>)>
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    let a = one_sided_induced(forward, depth)?;
    let b = one_sided_induced(backward, depth)?;
    round_trip(forward, backward, depth)?;
    round_trip(backward, forward, depth)?;
    Ok((a, b))
}
