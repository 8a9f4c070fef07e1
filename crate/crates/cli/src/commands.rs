use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use cufraisse::fraisse::*;
use cufraisse::hom::{elementary_enumerate, morphism_laws_check, ElementaryHom, Hom, HomKind, SimplicialHom};
use cufraisse::instances::*;
use cufraisse::limit::{cauchy_limit, converges_to, Enumeration, LimitTag, MorphismSequence};
use cufraisse::metrics::{lsc_metric, shift_counterexample, ChainMap, SoftScale};
use cufraisse::pl::{pl_induced_morphism, pl_sup_distance, PlMap};
use cufraisse::semigroup::check_axioms;
use cufraisse::{CuError, CuSemigroup, FiniteSubset};

use crate::manifest::{At, CatSpec, Command, Manifest, MapSpec, SgSpec};
use crate::report::{Report, RunError, Verdict};

type Run<T> = Result<T, RunError>;

pub fn run(m: &Manifest) -> Run<Report> {
    match m.command {
        Command::Check => check(m),
        Command::Enumerate => enumerate(m),
        Command::Amalgamate => amalgamate_cmd(m),
        Command::Fraisse => fraisse(m),
        Command::Limit => limit(m),
        Command::Metric => metric(m),
    }
}

// ---------------------------------------------------------------- building blocks

macro_rules! with_sg {
    ($spec:expr, $line:expr, $s:ident => $body:expr) => {{
        let cu = |e| RunError::from_cu(Some($line), e);
        match $spec {
            SgSpec::Elementary(n) => {
                let $s = Elementary::new(*n).map_err(cu)?;
                $body
            }
            SgSpec::ExtNat => {
                let $s = ExtNatSg;
                $body
            }
            SgSpec::SoftDim(p) => {
                let $s = SoftDim::new(*p).map_err(cu)?;
                $body
            }
            SgSpec::TruncatedEp(p) => {
                let $s = TruncatedEp::new(*p).map_err(cu)?;
                $body
            }
            SgSpec::Simplicial(r) => {
                let $s = Simplicial::new(*r).map_err(cu)?;
                $body
            }
            SgSpec::Lsc => {
                let $s = LscInterval;
                $body
            }
            SgSpec::G => {
                let $s = GeneratorG;
                $body
            }
            SgSpec::TwoPoint => {
                let $s = TwoPoint;
                $body
            }
        }
    }};
}

/// A manifest map as a morphism between built-in semigroups.
enum AnyHom {
    Elem(Hom<Elementary, Elementary>),
    Matrix(Hom<Simplicial, Simplicial>),
    Scale(Hom<SoftDim, SoftDim>),
    Shift(Hom<GeneratorG, GeneratorG>),
    Pl(Hom<LscInterval, LscInterval>),
}

fn any_hom(m: &At<MapSpec>) -> Run<AnyHom> {
    let cu = |e| RunError::from_cu(Some(m.line), e);
    Ok(match &m.item {
        MapSpec::Elem { n, m: k_m, k } => AnyHom::Elem(ElementaryHom::new(*n, *k_m, *k).map_err(cu)?.to_hom()),
        MapSpec::Matrix { cols, rows } => AnyHom::Matrix(SimplicialHom::new(rows.clone(), *cols).map_err(cu)?.to_hom()),
        MapSpec::Scale { p, c } => AnyHom::Scale(SoftScale::new(*p, c.clone()).map_err(cu)?.to_hom()),
        MapSpec::Shift(c) => AnyHom::Shift(ChainMap::shift(c).to_hom()),
        MapSpec::Pl { breaks, values } => {
            AnyHom::Pl(pl_induced_morphism(&PlMap::new(breaks.clone(), values.clone()).map_err(cu)?).map_err(cu)?)
        }
        MapSpec::Cantor { r, f } => AnyHom::Matrix(CantorMor::new(f.clone(), *r).map_err(cu)?.to_matrix().to_hom()),
        MapSpec::Power(_) | MapSpec::Ep { .. } => {
            return Err(RunError::input(m.line, "this map kind only exists inside a category"))
        }
    })
}

macro_rules! with_hom {
    ($h:expr, $x:ident => $body:expr) => {
        match $h {
            AnyHom::Elem($x) => $body,
            AnyHom::Matrix($x) => $body,
            AnyHom::Scale($x) => $body,
            AnyHom::Shift($x) => $body,
            AnyHom::Pl($x) => $body,
        }
    };
}

/// Category morphisms written as manifest maps.
trait ManifestCategory: FraisseCategory {
    fn mor(&self, m: &At<MapSpec>) -> Run<Self::Mor>;
}

fn wrong_kind(m: &At<MapSpec>, cat: &str) -> RunError {
    RunError::input(m.line, format!("map kind does not belong to category {cat}"))
}

impl ManifestCategory for EInf {
    fn mor(&self, m: &At<MapSpec>) -> Run<ElementaryHom> {
        match &m.item {
            MapSpec::Elem { n, m: cod, k } => ElementaryHom::new(*n, *cod, *k).map_err(|e| RunError::from_cu(Some(m.line), e)),
            _ => Err(wrong_kind(m, &self.name())),
        }
    }
}

impl ManifestCategory for ElemEmb {
    fn mor(&self, m: &At<MapSpec>) -> Run<ElementaryHom> {
        let h = EInf.mor(m)?;
        if !self.homs(&h.n, &h.m, 0).contains(&h) {
            return Err(RunError::input(m.line, "not an order embedding"));
        }
        Ok(h)
    }
}

impl ManifestCategory for Sp {
    fn mor(&self, m: &At<MapSpec>) -> Run<u32> {
        match m.item {
            MapSpec::Power(a) => Ok(a),
            _ => Err(wrong_kind(m, &self.name())),
        }
    }
}

impl ManifestCategory for Ep {
    fn mor(&self, m: &At<MapSpec>) -> Run<EpMor> {
        match m.item {
            MapSpec::Ep { from, to } if from <= to => Ok(EpMor { from, to }),
            MapSpec::Ep { .. } => Err(RunError::input(m.line, "`ep from to` needs from <= to")),
            _ => Err(wrong_kind(m, &self.name())),
        }
    }
}

impl ManifestCategory for KCantor {
    fn mor(&self, m: &At<MapSpec>) -> Run<CantorMor> {
        match &m.item {
            MapSpec::Cantor { r, f } => CantorMor::new(f.clone(), *r).map_err(|e| RunError::from_cu(Some(m.line), e)),
            _ => Err(wrong_kind(m, &self.name())),
        }
    }
}

impl ManifestCategory for KPseudoArc {
    fn mor(&self, m: &At<MapSpec>) -> Run<PlMap> {
        match &m.item {
            MapSpec::Pl { breaks, values } => {
                let h = PlMap::new(breaks.clone(), values.clone()).map_err(|e| RunError::from_cu(Some(m.line), e))?;
                pl_induced_morphism(&h).map_err(|e| RunError::from_cu(Some(m.line), e))?;
                Ok(h)
            }
            _ => Err(wrong_kind(m, &self.name())),
        }
    }
}

macro_rules! with_cat {
    ($spec:expr, $c:ident => $body:expr) => {{
        let cu = |e| RunError::from_cu(Some($spec.line), e);
        match &$spec.item {
            CatSpec::EInf => {
                let $c = EInf;
                $body
            }
            CatSpec::EEmb => {
                let $c = ElemEmb;
                $body
            }
            CatSpec::Sp(p) => {
                let $c = Sp::new(*p).map_err(cu)?;
                $body
            }
            CatSpec::Ep(p) => {
                let $c = Ep::new(*p).map_err(cu)?;
                $body
            }
            CatSpec::KCantor => {
                let $c = KCantor;
                $body
            }
            CatSpec::KP => {
                let $c = KPseudoArc;
                $body
            }
        }
    }};
}

fn category(m: &Manifest) -> Run<&At<CatSpec>> {
    m.category.as_ref().ok_or_else(|| RunError::Input(format!("`{}` needs a `category` line", m.command.name())))
}

// ---------------------------------------------------------------- check

fn check(m: &Manifest) -> Run<Report> {
    let mut r = Report::new("check");
    if m.semigroups.is_empty() && m.maps.is_empty() {
        return Err(RunError::Input("`check` needs `semigroup` or `map` lines".into()));
    }
    let mut axioms = vec![];
    for s in &m.semigroups {
        let rep = with_sg!(&s.item, s.line, sg => check_axioms(&sg, m.depth));
        let mut lines = vec![format!(
            "{} elements, {} way-below pairs, {} violations",
            rep.elements_checked, rep.ll_pairs_checked, rep.total_violations
        )];
        lines.extend(rep.violations.iter().map(|v| format!("{:?}: {}", v.axiom, v.witnesses.join(", "))));
        if !rep.passed() {
            r.mark(Verdict::Fail);
        }
        r.section(format!("axioms {} depth {}", rep.semigroup, m.depth), lines);
        axioms.push(rep);
    }
    let mut laws = vec![];
    for h in &m.maps {
        let rep = with_hom!(any_hom(h)?, x => morphism_laws_check(&x, m.depth));
        let mut lines = vec![format!("{} pairs, {} violations", rep.pairs_checked, rep.violations.len())];
        lines.extend(rep.violations.iter().map(|v| format!("{v:?}")));
        if !rep.passed() {
            r.mark(Verdict::Fail);
        }
        r.section(format!("morphism {} (line {})", rep.morphism, h.line), lines);
        laws.push(rep);
    }
    r.data("axioms", &axioms);
    r.data("morphisms", &laws);
    Ok(r)
}

// ---------------------------------------------------------------- enumerate

fn enumerate(m: &Manifest) -> Run<Report> {
    let mut r = Report::new("enumerate");
    if m.homs.is_empty() {
        return Err(RunError::Input("`enumerate` needs `homs n m morphisms|embeddings` lines".into()));
    }
    let mut all = vec![];
    for h in &m.homs {
        let (n, k_m, kind) = h.item;
        if n == 0 || k_m == 0 {
            return Err(RunError::input(h.line, "E_0 is not an elementary semigroup"));
        }
        let homs = elementary_enumerate(n, k_m, kind);
        let mut lines: Vec<String> = homs.iter().map(|e| format!("1 -> {}  {:?}", e.k, e.classify())).collect();
        lines.push(format!("{} maps", homs.len()));
        if kind == HomKind::Embeddings {
            lines.push(format!("interval rule: {k_m}/{} < k <= {k_m}/{n}", n + 1));
        }
        r.section(format!("{kind:?} E_{n} -> E_{k_m}"), lines);
        all.push(json!({ "n": n, "m": k_m, "kind": kind, "maps": homs }));
    }
    r.data("enumerations", all);
    Ok(r)
}

// ---------------------------------------------------------------- amalgamate

fn amalgamate_in<C: ManifestCategory>(cat: &C, m: &Manifest, r: &mut Report) -> Run<()> {
    let [a1, a2] = m.maps.as_slice() else {
        return Err(RunError::Input("`amalgamate` needs exactly two `map` lines".into()));
    };
    let (x1, x2) = (cat.mor(a1)?, cat.mor(a2)?);
    if cat.dom(&x1) != cat.dom(&x2) {
        return Err(RunError::input(a2.line, "the two maps have different domains"));
    }
    let host = cat.semigroup(&cat.dom(&x1));
    let f = FiniteSubset::basis(host.as_ref(), m.depth);
    let header = vec![
        format!("category {}", cat.name()),
        format!("alpha1 = {}", cat.encode_mor(&x1)),
        format!("alpha2 = {}", cat.encode_mor(&x2)),
        format!("F = depth-{} basis of {} ({} elements)", m.depth, host.name(), f.len()),
        format!("bound {}", m.bound),
    ];
    r.section("input", header);
    match amalgamate(cat, &x1, &x2, &f, m.bound) {
        Ok(am) => {
            r.section(
                "amalgam",
                vec![
                    format!("object {:?}", am.object),
                    format!("beta1 = {}", cat.encode_mor(&am.beta1)),
                    format!("beta2 = {}", cat.encode_mor(&am.beta2)),
                    format!("closed form: {}", am.closed_form),
                    "beta1 . alpha1 and beta2 . alpha2 compare on F".into(),
                ],
            );
            r.data("amalgam", &am);
        }
        Err(CuError::Exhausted { bound, what }) => {
            r.section("search", vec![format!("exhausted at bound {bound}: {what}")]);
            r.data("exhausted", json!({ "bound": bound, "what": what }));
            r.mark(Verdict::Exhausted);
        }
        Err(e) => return Err(RunError::from_cu(None, e)),
    }
    Ok(())
}

/// For `1 ↦ k1`, `1 ↦ k2` out of `E_1` among embeddings, an exhausted search
/// is settled by the interval certificate.
fn certify_obstruction(m: &Manifest, r: &mut Report) {
    let ks: Vec<_> = m
        .maps
        .iter()
        .filter_map(|a| match a.item {
            MapSpec::Elem { n: 1, m: cod, k: Fin(k) } => Some((cod, k)),
            _ => None,
        })
        .collect();
    let [(n1, k1), (n2, k2)] = ks.as_slice() else { return };
    if n1 != n2 {
        return;
    }
    let c = interval_certificate(*k1, *k2, *n1);
    r.section(
        "interval certificate",
        vec![
            format!("({}, {}]·m and ({}, {}]·m", c.first.0, c.first.1, c.second.0, c.second.1),
            format!("values finite: {}, disjoint: {}, holds: {}", c.values_finite, c.disjoint, c.holds()),
        ],
    );
    if c.holds() {
        r.section("conclusion", vec!["no amalgamation exists in any E_m".into()]);
        r.verdict = Verdict::Pass;
    }
    r.data("interval_certificate", &c);
}

fn amalgamate_cmd(m: &Manifest) -> Run<Report> {
    let mut r = Report::new("amalgamate");
    let spec = category(m)?;
    with_cat!(spec, c => amalgamate_in(&c, m, &mut r))?;
    if r.verdict == Verdict::Exhausted && spec.item == CatSpec::EEmb {
        certify_obstruction(m, &mut r);
    }
    Ok(r)
}

// ---------------------------------------------------------------- fraisse

fn fraisse_in<C: ManifestCategory>(cat: &C, m: &Manifest, r: &mut Report) -> Run<()> {
    let cu = |e| RunError::from_cu(None, e);
    let schedule = DemandSchedule::new(m.seed, m.depth);
    let pre = build_fraisse_prefix(cat, &schedule, m.steps, m.bound).map_err(cu)?;
    let problems = verify_prefix(cat, &pre);
    let mut lines = vec![
        format!("category {}, seed {}, {} demands, bound {}", cat.name(), m.seed, m.steps, m.bound),
        format!("stages: {}", pre.objects.iter().map(|o| format!("{o:?}")).collect::<Vec<_>>().join(" -> ")),
    ];
    lines.extend(pre.connecting.iter().enumerate().map(|(i, s)| format!("sigma_{i} = {}", cat.encode_mor(s))));
    lines.push(format!(
        "{} hom demands met, {} object demands met, {} skipped",
        pre.ledger.len(),
        pre.object_ledger.len(),
        pre.skipped.len()
    ));
    r.section("prefix", lines);
    if !problems.is_empty() {
        r.mark(Verdict::Fail);
        r.section("prefix problems", problems.clone());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    let sources: Vec<C::Obj> = cat.objects(m.bound).into_iter().take(3).collect();
    let mut certificates = vec![];
    let mut lines = vec![];
    let mut attempts = 0;
    while certificates.len() < m.certificates && pre.last() > 0 {
        attempts += 1;
        if attempts > 100 * m.certificates {
            r.mark(Verdict::Exhausted);
            lines.push(format!("only {} triples found after {} attempts", certificates.len(), attempts - 1));
            break;
        }
        let l = rng.gen_range(0..pre.last());
        let c = &sources[rng.gen_range(0..sources.len())];
        let homs = cat.homs(c, &pre.objects[l], m.bound);
        if homs.is_empty() {
            continue;
        }
        let (a, b) = (&homs[rng.gen_range(0..homs.len())], &homs[rng.gen_range(0..homs.len())]);
        let host = cat.semigroup(c);
        let picked: Vec<_> = host.basis(m.depth).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let f = FiniteSubset::new(host.as_ref(), picked);
        let cert = homogeneity_iso(cat, &pre, a, b, &f, m.depth, m.bound).map_err(cu)?.certificate;
        lines.push(format!(
            "alpha {}, beta {} into stage {}; |F| = {}; j = {}, j2 = {}; forward {}, backward {}",
            cat.encode_mor(a),
            cat.encode_mor(b),
            l,
            f.len(),
            cert.j,
            cert.j2,
            cert.forward,
            cert.backward
        ));
        if !(cert.forward && cert.backward) {
            r.mark(Verdict::Fail);
        }
        certificates.push(cert);
    }
    r.section("homogeneity", lines);

    let archive: ArchiveOf<C> = HomogeneityArchive { prefix: pre, certificates };
    let json = archive_to_json::<C>(&archive).map_err(cu)?;
    let replay = replay_archive(cat, &json).map_err(cu)?;
    if !replay.passed() {
        r.mark(Verdict::Fail);
    }
    r.section("replay", vec![format!("{replay:?}")]);
    r.data("archive", &archive);
    r.data("replay", &replay);
    r.archive = Some(json);
    Ok(())
}

fn fraisse(m: &Manifest) -> Run<Report> {
    let mut r = Report::new("fraisse");
    let spec = category(m)?;
    with_cat!(spec, c => fraisse_in(&c, m, &mut r))?;
    Ok(r)
}

/// Replays an archive written by `fraisse`, choosing the category by name.
pub fn replay(json: &str) -> Run<Report> {
    let cu = |e| RunError::from_cu(None, e);
    let v: serde_json::Value = serde_json::from_str(json).map_err(|e| RunError::Input(format!("archive: {e}")))?;
    let name = v["prefix"]["category"]
        .as_str()
        .ok_or_else(|| RunError::Input("archive has no prefix category".into()))?
        .to_string();
    let prime = |rest: &str| rest.parse::<u64>().map_err(|_| RunError::Input(format!("unknown category `{name}`")));
    let rep = match name.as_str() {
        "e_inf" => replay_archive(&EInf, json),
        "e_emb" => replay_archive(&ElemEmb, json),
        "K_Cantor" => replay_archive(&KCantor, json),
        "K_P" => replay_archive(&KPseudoArc, json),
        s if s.starts_with("s_") => replay_archive(&Sp::new(prime(&s[2..])?).map_err(cu)?, json),
        s if s.starts_with("e_") => replay_archive(&Ep::new(prime(&s[2..])?).map_err(cu)?, json),
        _ => return Err(RunError::Input(format!("unknown category `{name}`"))),
    }
    .map_err(|e| RunError::Input(format!("archive: {e}")))?;
    let mut r = Report::new("replay");
    r.section(
        "replay",
        vec![
            format!("category {name}"),
            format!("prefix problems: {}", rep.prefix_problems.len()),
            format!("certificates: {}, failed: {:?}", rep.certificates, rep.failed),
            format!("bit exact: {}", rep.bit_exact),
        ],
    );
    if !rep.passed() {
        r.mark(Verdict::Fail);
    }
    r.data("replay", &rep);
    Ok(r)
}

// ---------------------------------------------------------------- limit

fn limit_of<S, T>(maps: Vec<Hom<S, T>>, m: &Manifest, r: &mut Report) -> Run<()>
where
    S: CuSemigroup + 'static,
    T: CuSemigroup + 'static,
{
    let cod = maps[0].cod().clone();
    let seq = MorphismSequence::new(maps).map_err(|e| RunError::from_cu(None, e))?;
    let dom = seq.domain().clone();
    let lim = match cauchy_limit(&seq, m.depth, Enumeration::Direct) {
        Ok(l) => Arc::new(l),
        Err(e @ CuError::NotCauchy { .. }) => {
            r.section("limit", vec![e.to_string()]);
            r.data("not_cauchy", e.to_string());
            r.mark(Verdict::Fail);
            return Ok(());
        }
        Err(e) => return Err(RunError::from_cu(None, e)),
    };
    let basis = FiniteSubset::basis(dom.as_ref(), m.depth);
    let mut values = vec![];
    let mut lines = vec![];
    for x in &basis.elements {
        let (v, tag) = lim.eval_tagged(x);
        let tag = match tag {
            LimitTag::Exact => "exact",
            LimitTag::InfMultiple => "inf-multiple",
            LimitTag::DepthBounded => "depth-bounded",
        };
        lines.push(format!("{} -> {} ({tag})", dom.encode(x), cod.encode(&v)));
        values.push(json!({ "x": dom.encode(x), "value": cod.encode(&v), "tag": tag }));
    }
    let tail = converges_to(&seq, &lim.to_hom(), &basis);
    if tail.is_none() {
        r.mark(Verdict::Fail);
    }
    lines.push(match tail {
        Some(n) => format!("maps from index {n} on compare with the limit on the basis"),
        None => "the limit does not compare with the sequence on the basis".into(),
    });
    r.section(format!("limit on the depth-{} basis of {}", m.depth, dom.name()), lines);
    r.data("values", values);
    r.data("tail_index", tail);
    Ok(())
}

fn limit(m: &Manifest) -> Run<Report> {
    let mut r = Report::new("limit");
    if m.maps.is_empty() {
        return Err(RunError::Input("`limit` needs `map` lines".into()));
    }
    let homs = m.maps.iter().map(any_hom).collect::<Run<Vec<_>>>()?;
    macro_rules! all {
        ($v:ident) => {
            homs.into_iter()
                .zip(&m.maps)
                .map(|(h, a)| match h {
                    AnyHom::$v(x) => Ok(x),
                    _ => Err(RunError::input(a.line, "all maps of a sequence must have the same kind")),
                })
                .collect::<Run<Vec<_>>>()?
        };
    }
    match &homs[0] {
        AnyHom::Elem(_) => limit_of(all!(Elem), m, &mut r)?,
        AnyHom::Matrix(_) => limit_of(all!(Matrix), m, &mut r)?,
        AnyHom::Scale(_) => limit_of(all!(Scale), m, &mut r)?,
        AnyHom::Shift(_) => limit_of(all!(Shift), m, &mut r)?,
        AnyHom::Pl(_) => limit_of(all!(Pl), m, &mut r)?,
    }
    Ok(r)
}

// ---------------------------------------------------------------- metric

fn metric(m: &Manifest) -> Run<Report> {
    let mut r = Report::new("metric");
    let cu = |e| RunError::from_cu(None, e);
    if m.shift_tables.is_empty() && m.maps.is_empty() {
        return Err(RunError::Input("`metric` needs `table shift` or two `map pl` lines".into()));
    }
    for t in &m.shift_tables {
        let (max_n, size) = t.item;
        if max_n < 2 || size < 2 {
            return Err(RunError::input(t.line, "`table shift` needs max n >= 2 and m >= 2"));
        }
        let rows = shift_counterexample(max_n, size).map_err(cu)?;
        let lines = rows
            .iter()
            .map(|row| format!("n = {}: d_G(shift . lambda_n, lambda_n) = {}, d_Lambda(shift, id) = {}", row.n, row.diagonal, row.d_lambda.value))
            .collect();
        r.section(format!("shift by 1/n against the identity, Lambda = lambda_2..lambda_{size}"), lines);
        let data: Vec<_> = rows
            .iter()
            .map(|row| json!({ "n": row.n, "diagonal": row.diagonal.to_string(), "d_lambda": row.d_lambda.value.to_string() }))
            .collect();
        r.data("shift_table", data);
    }
    if !m.maps.is_empty() {
        let pls = m
            .maps
            .iter()
            .map(|a| match &a.item {
                MapSpec::Pl { breaks, values } => {
                    PlMap::new(breaks.clone(), values.clone()).map_err(|e| RunError::from_cu(Some(a.line), e))
                }
                _ => Err(RunError::input(a.line, "`metric` compares `map pl` lines")),
            })
            .collect::<Run<Vec<_>>>()?;
        let [h, g] = pls.as_slice() else {
            return Err(RunError::Input("`metric` needs exactly two `map pl` lines".into()));
        };
        let grid = m.grid.unwrap_or(16);
        let d_grid = lsc_metric(h, g, grid).map_err(cu)?;
        let d_sup = pl_sup_distance(h, g);
        r.section(
            "Lsc distance of the induced morphisms",
            vec![format!("grid metric (m = {grid}): {d_grid}"), format!("sup distance: {d_sup}")],
        );
        r.data("lsc", json!({ "grid": grid, "grid_metric": d_grid.to_string(), "sup_distance": d_sup.to_string() }));
    }
    Ok(r)
}
