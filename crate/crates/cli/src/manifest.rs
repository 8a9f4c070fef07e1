//! The line-oriented run manifest.
//!
//! ```text
//! # comment
//! command amalgamate
//! category e_emb
//! map elem 1 6 4
//! map elem 1 6 5
//! bound 500
//! ```
//!
//! One directive per line; `#` starts a comment. Integers, `inf` and exact
//! rationals such as `-3/4` are the only literals.

use std::path::PathBuf;
use std::str::FromStr;

use cufraisse::hom::HomKind;
use cufraisse::instances::{ExtNat, Fin, Inf};
use cufraisse::Q;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Enumerate,
    Amalgamate,
    Fraisse,
    Limit,
    Metric,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Enumerate => "enumerate",
            Command::Amalgamate => "amalgamate",
            Command::Fraisse => "fraisse",
            Command::Limit => "limit",
            Command::Metric => "metric",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SgSpec {
    /// `E n`
    Elementary(u64),
    /// `Nbar`
    ExtNat,
    /// `S p`
    SoftDim(u64),
    /// `Ep p`
    TruncatedEp(u64),
    /// `N r`
    Simplicial(usize),
    Lsc,
    G,
    TwoPoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatSpec {
    EInf,
    EEmb,
    Sp(u64),
    Ep(u64),
    KCantor,
    KP,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapSpec {
    /// `elem n m k`: `E_n → E_m`, `1 ↦ k`.
    Elem { n: u64, m: u64, k: ExtNat },
    /// `matrix cols : a b ; c d`, rows separated by `;`.
    Matrix { cols: usize, rows: Vec<Vec<ExtNat>> },
    /// `scale p c` on `S_p`.
    Scale { p: u64, c: Q },
    /// `shift c` on the generator.
    Shift(Q),
    /// `pl b_0 … b_k : v_0 … v_k`, the PL map and its induced morphism.
    Pl { breaks: Vec<Q>, values: Vec<Q> },
    /// `cantor r : f_0 … f_{s-1}`.
    Cantor { r: usize, f: Vec<usize> },
    /// `power a`: `×p^a` in `s_p`.
    Power(u32),
    /// `ep from to`: `E_{p^from} → E_{p^to}`.
    Ep { from: u32, to: u32 },
}

/// A directive together with the line it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct At<T> {
    pub line: usize,
    pub item: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub command: Command,
    pub semigroups: Vec<At<SgSpec>>,
    pub category: Option<At<CatSpec>>,
    pub maps: Vec<At<MapSpec>>,
    /// `homs n m morphisms|embeddings`
    pub homs: Vec<At<(u64, u64, HomKind)>>,
    /// `table shift max_n m`
    pub shift_tables: Vec<At<(u64, u64)>>,
    /// `grid m` for the Lsc grid metric.
    pub grid: Option<u64>,
    pub seed: u64,
    pub depth: usize,
    pub bound: usize,
    pub steps: usize,
    pub certificates: usize,
    pub out: Option<PathBuf>,
}

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = vec![];
    let mut start = None;
    for (i, c) in line.char_indices().chain([(line.len(), ' ')]) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Tok { text: &line[s..i], col: line[..s].chars().count() + 1 });
                start = None;
            }
            _ => {}
        }
    }
    out
}

struct Line<'a> {
    no: usize,
    toks: Vec<Tok<'a>>,
    end_col: usize,
}

impl<'a> Line<'a> {
    fn err(&self, idx: usize, msg: impl Into<String>) -> ParseError {
        let col = self.toks.get(idx).map_or(self.end_col, |t| t.col);
        ParseError { line: self.no, col, msg: msg.into() }
    }

    fn get(&self, idx: usize, what: &str) -> Result<&'a str, ParseError> {
        self.toks.get(idx).map(|t| t.text).ok_or_else(|| self.err(idx, format!("expected {what}")))
    }

    fn parse<T: FromStr>(&self, idx: usize, what: &str) -> Result<T, ParseError> {
        let s = self.get(idx, what)?;
        s.parse().map_err(|_| self.err(idx, format!("expected {what}, found `{s}`")))
    }

    fn ext(&self, idx: usize) -> Result<ExtNat, ParseError> {
        match self.get(idx, "an integer or `inf`")? {
            "inf" => Ok(Inf),
            _ => Ok(Fin(self.parse(idx, "an integer or `inf`")?)),
        }
    }

    fn done(&self, idx: usize) -> Result<(), ParseError> {
        match self.toks.get(idx) {
            Some(t) => Err(self.err(idx, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }

    /// Index of the `:` separator at or after `from`.
    fn colon(&self, from: usize) -> Result<usize, ParseError> {
        (from..self.toks.len())
            .find(|&i| self.toks[i].text == ":")
            .ok_or_else(|| self.err(self.toks.len(), "expected `:`"))
    }

    fn rationals(&self, range: std::ops::Range<usize>) -> Result<Vec<Q>, ParseError> {
        range.map(|i| self.parse(i, "a rational")).collect()
    }
}

fn sg(l: &Line) -> Result<SgSpec, ParseError> {
    let spec = match l.get(1, "a semigroup")? {
        "E" => SgSpec::Elementary(l.parse(2, "n")?),
        "Nbar" => SgSpec::ExtNat,
        "S" => SgSpec::SoftDim(l.parse(2, "a prime")?),
        "Ep" => SgSpec::TruncatedEp(l.parse(2, "a prime")?),
        "N" => SgSpec::Simplicial(l.parse(2, "a rank")?),
        "Lsc" => SgSpec::Lsc,
        "G" => SgSpec::G,
        "two" => SgSpec::TwoPoint,
        other => return Err(l.err(1, format!("unknown semigroup `{other}`"))),
    };
    let used = match spec {
        SgSpec::Elementary(_) | SgSpec::SoftDim(_) | SgSpec::TruncatedEp(_) | SgSpec::Simplicial(_) => 3,
        _ => 2,
    };
    l.done(used)?;
    Ok(spec)
}

fn cat(l: &Line) -> Result<CatSpec, ParseError> {
    let (spec, used) = match l.get(1, "a category")? {
        "e_inf" => (CatSpec::EInf, 2),
        "e_emb" => (CatSpec::EEmb, 2),
        "s" => (CatSpec::Sp(l.parse(2, "a prime")?), 3),
        "e" => (CatSpec::Ep(l.parse(2, "a prime")?), 3),
        "k_cantor" => (CatSpec::KCantor, 2),
        "k_p" => (CatSpec::KP, 2),
        other => return Err(l.err(1, format!("unknown category `{other}`"))),
    };
    l.done(used)?;
    Ok(spec)
}

fn map(l: &Line) -> Result<MapSpec, ParseError> {
    let n = l.toks.len();
    let spec = match l.get(1, "a map kind")? {
        "elem" => {
            l.done(5)?;
            MapSpec::Elem { n: l.parse(2, "n")?, m: l.parse(3, "m")?, k: l.ext(4)? }
        }
        "matrix" => {
            let cols = l.parse(2, "a column count")?;
            if l.get(3, "`:`")? != ":" {
                return Err(l.err(3, "expected `:`"));
            }
            let mut rows = vec![vec![]];
            for i in 4..n {
                if l.toks[i].text == ";" {
                    rows.push(vec![]);
                } else {
                    rows.last_mut().expect("nonempty").push(l.ext(i)?);
                }
            }
            MapSpec::Matrix { cols, rows }
        }
        "scale" => {
            l.done(4)?;
            MapSpec::Scale { p: l.parse(2, "a prime")?, c: l.parse(3, "a rational")? }
        }
        "shift" => {
            l.done(3)?;
            MapSpec::Shift(l.parse(2, "a rational")?)
        }
        "pl" => {
            let c = l.colon(2)?;
            MapSpec::Pl { breaks: l.rationals(2..c)?, values: l.rationals(c + 1..n)? }
        }
        "cantor" => {
            let r = l.parse(2, "a rank")?;
            if l.get(3, "`:`")? != ":" {
                return Err(l.err(3, "expected `:`"));
            }
            let f = (4..n).map(|i| l.parse(i, "an index")).collect::<Result<_, _>>()?;
            MapSpec::Cantor { r, f }
        }
        "power" => {
            l.done(3)?;
            MapSpec::Power(l.parse(2, "an exponent")?)
        }
        "ep" => {
            l.done(4)?;
            MapSpec::Ep { from: l.parse(2, "an exponent")?, to: l.parse(3, "an exponent")? }
        }
        other => return Err(l.err(1, format!("unknown map kind `{other}`"))),
    };
    Ok(spec)
}

impl FromStr for Manifest {
    type Err = ParseError;

    fn from_str(src: &str) -> Result<Manifest, ParseError> {
        let mut command = None;
        let mut m = Manifest {
            command: Command::Check,
            semigroups: vec![],
            category: None,
            maps: vec![],
            homs: vec![],
            shift_tables: vec![],
            grid: None,
            seed: 0,
            depth: 3,
            bound: 8,
            steps: 12,
            certificates: 3,
            out: None,
        };
        let mut last_line = 0;
        for (i, raw) in src.lines().enumerate() {
            let text = raw.split('#').next().unwrap_or("");
            let l = Line { no: i + 1, toks: tokens(text), end_col: text.chars().count() + 1 };
            last_line = l.no;
            let Some(head) = l.toks.first() else { continue };
            let at = |item| At { line: l.no, item };
            match head.text {
                "command" => {
                    if command.is_some() {
                        return Err(l.err(0, "second `command` directive"));
                    }
                    command = Some(match l.get(1, "a command")? {
                        "check" => Command::Check,
                        "enumerate" => Command::Enumerate,
                        "amalgamate" => Command::Amalgamate,
                        "fraisse" => Command::Fraisse,
                        "limit" => Command::Limit,
                        "metric" => Command::Metric,
                        other => return Err(l.err(1, format!("unknown command `{other}`"))),
                    });
                    l.done(2)?;
                }
                "semigroup" => m.semigroups.push(at(sg(&l)?)),
                "category" => {
                    if m.category.is_some() {
                        return Err(l.err(0, "second `category` directive"));
                    }
                    m.category = Some(At { line: l.no, item: cat(&l)? });
                }
                "map" => m.maps.push(At { line: l.no, item: map(&l)? }),
                "homs" => {
                    let kind = match l.get(3, "`morphisms` or `embeddings`")? {
                        "morphisms" => HomKind::Morphisms,
                        "embeddings" => HomKind::Embeddings,
                        other => return Err(l.err(3, format!("unknown hom kind `{other}`"))),
                    };
                    l.done(4)?;
                    m.homs.push(At { line: l.no, item: (l.parse(1, "n")?, l.parse(2, "m")?, kind) });
                }
                "table" => {
                    if l.get(1, "`shift`")? != "shift" {
                        return Err(l.err(1, "only `table shift` is known"));
                    }
                    l.done(4)?;
                    m.shift_tables.push(At { line: l.no, item: (l.parse(2, "max n")?, l.parse(3, "m")?) });
                }
                "grid" => {
                    l.done(2)?;
                    m.grid = Some(l.parse(1, "a grid size")?);
                }
                "seed" | "depth" | "bound" | "steps" | "certificates" => {
                    l.done(2)?;
                    let v: u64 = l.parse(1, "a nonnegative integer")?;
                    match head.text {
                        "seed" => m.seed = v,
                        "depth" => m.depth = v as usize,
                        "bound" => m.bound = v as usize,
                        "steps" => m.steps = v as usize,
                        _ => m.certificates = v as usize,
                    }
                }
                "out" => {
                    l.done(2)?;
                    m.out = Some(PathBuf::from(l.get(1, "a directory")?));
                }
                other => return Err(l.err(0, format!("unknown directive `{other}`"))),
            }
        }
        m.command = command.ok_or(ParseError { line: last_line.max(1), col: 1, msg: "missing `command`".into() })?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cufraisse::q;

    #[test]
    fn parses_directives() {
        let m: Manifest = "command limit\n# note\nmap pl 0 1/2 1 : 0 1 1/2  # trailing\nmap elem 1 6 inf\ndepth 4\n"
            .parse()
            .unwrap();
        assert_eq!(m.command, Command::Limit);
        assert_eq!(m.depth, 4);
        assert_eq!(
            m.maps[0].item,
            MapSpec::Pl { breaks: vec![q(0, 1), q(1, 2), q(1, 1)], values: vec![q(0, 1), q(1, 1), q(1, 2)] }
        );
        assert_eq!(m.maps[1].item, MapSpec::Elem { n: 1, m: 6, k: Inf });
        assert_eq!(m.maps[1].line, 4);
    }

    #[test]
    fn matrix_rows() {
        let m: Manifest = "command check\nmap matrix 2 : 1 0 ; inf 2".parse().unwrap();
        assert_eq!(m.maps[0].item, MapSpec::Matrix { cols: 2, rows: vec![vec![Fin(1), Fin(0)], vec![Inf, Fin(2)]] });
    }

    #[test]
    fn errors_carry_positions() {
        let e = "command check\nsemigroup E x".parse::<Manifest>().unwrap_err();
        assert_eq!((e.line, e.col), (2, 13));
        let e = "command check\n  frobnicate".parse::<Manifest>().unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        let e = "map shift 1/2 extra\ncommand metric".parse::<Manifest>().unwrap_err();
        assert_eq!((e.line, e.col), (1, 15));
        let e = "depth 3".parse::<Manifest>().unwrap_err();
        assert!(e.msg.contains("missing"));
        let e = "command check\nmap pl 0 1 0 1".parse::<Manifest>().unwrap_err();
        assert_eq!((e.line, e.col), (2, 15));
    }
}
