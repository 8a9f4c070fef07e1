use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CuError, Result};
use crate::instances::extnat::{ExtNat, Fin, Inf};
use crate::rational::Q;
use crate::semigroup::CuSemigroup;

/// An element of `N[1/p] ⊔ (0, ∞]`, or of its truncation.
///
/// `Infinity` is the soft `∞` in `S_p` and the compact top in the truncated
/// semigroup.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dim {
    Compact(Q),
    Soft(Q),
    Infinity,
}

pub use Dim::{Compact, Infinity, Soft};

impl Dim {
    /// `None` stands for `∞`.
    pub fn value(&self) -> Option<&Q> {
        match self {
            Compact(q) | Soft(q) => Some(q),
            Infinity => None,
        }
    }

    pub fn is_compact_tag(&self) -> bool {
        matches!(self, Compact(_))
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Compact(q) => write!(f, "c{q}"),
            Soft(q) => write!(f, "s{q}"),
            Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn cmp_value(a: &Dim, b: &Dim) -> Ordering {
    match (a.value(), b.value()) {
        (Some(x), Some(y)) => x.cmp(y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn sp_leq(a: &Dim, b: &Dim) -> bool {
    match cmp_value(a, b) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => !(a.is_compact_tag() && !b.is_compact_tag()),
    }
}

fn sp_way_below(a: &Dim, b: &Dim) -> bool {
    match cmp_value(a, b) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => b.is_compact_tag(),
    }
}

fn sp_add(a: &Dim, b: &Dim) -> Dim {
    match (a, b) {
        (Infinity, _) | (_, Infinity) => Infinity,
        (Compact(x), Compact(y)) => Compact(x + y),
        _ => {
            let v = a.value().unwrap() + b.value().unwrap();
            if v.is_zero() {
                Compact(v)
            } else {
                Soft(v)
            }
        }
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// The dimension semigroup of infinite type `S_p = N[1/p] ⊔ (0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SoftDim {
    p: u64,
}

impl SoftDim {
    pub fn new(p: u64) -> Result<SoftDim> {
        if !is_prime(p) {
            return Err(CuError::InvalidParameter(format!("{p} is not prime")));
        }
        Ok(SoftDim { p })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn compact(&self, q: Q) -> Result<Dim> {
        if q.is_negative() || !q.is_p_adic(self.p) {
            return Err(CuError::Representation(format!("{q} is not in N[1/{}]", self.p)));
        }
        Ok(Compact(q))
    }

    pub fn soft(&self, q: Q) -> Result<Dim> {
        if !q.is_positive() {
            return Err(CuError::Representation(format!("soft value {q} must be positive")));
        }
        Ok(Soft(q))
    }

    /// Stage-`i` element `x` of the sequence `(N̄, ×p)`, normalized by `p^i`.
    pub fn embed_stage(&self, i: u32, x: ExtNat) -> Dim {
        softdim_embed_stage(self.p, i, x)
    }
}

/// `x ↦ x / p^i` with `∞ ↦ Soft(∞)`.
pub fn softdim_embed_stage(p: u64, i: u32, x: ExtNat) -> Dim {
    match x {
        Fin(n) => Compact(Q::int(n as i64) / Q::pow_int(p, i)),
        Inf => Infinity,
    }
}

fn dyadic_values(p: u64, depth: usize, max_num: u64) -> impl Iterator<Item = Q> {
    let den = Q::pow_int(p, depth as u32);
    (0..=max_num).map(move |k| Q::int(k as i64) / &den)
}

impl CuSemigroup for SoftDim {
    type Elem = Dim;

    fn name(&self) -> String {
        format!("S_{}", self.p)
    }

    fn zero(&self) -> Dim {
        Compact(Q::zero())
    }

    fn add(&self, a: &Dim, b: &Dim) -> Dim {
        sp_add(a, b)
    }

    fn leq(&self, a: &Dim, b: &Dim) -> bool {
        sp_leq(a, b)
    }

    fn way_below(&self, a: &Dim, b: &Dim) -> bool {
        sp_way_below(a, b)
    }

    /// Compact and soft values `k / p^depth` with `k <= depth·p^depth`, and `∞`.
    fn basis(&self, depth: usize) -> Vec<Dim> {
        let max_num = depth as u64 * self.p.pow(depth as u32);
        let mut out: Vec<Dim> = dyadic_values(self.p, depth, max_num)
            .flat_map(|v| {
                let soft = (!v.is_zero()).then(|| Soft(v.clone()));
                std::iter::once(Compact(v)).chain(soft)
            })
            .collect();
        out.push(Infinity);
        out
    }

    fn interpolate(&self, lo: &Dim, hi: &Dim) -> Option<Dim> {
        if !sp_way_below(lo, hi) {
            return None;
        }
        Some(match (lo.value(), hi.value()) {
            (Some(a), Some(b)) if a == b => hi.clone(),
            (Some(a), Some(b)) => Soft(a.mid(b)),
            (Some(a), None) => Soft(a + Q::one()),
            (None, _) => unreachable!("soft infinity is not way-below anything"),
        })
    }

    fn inf_multiple(&self, x: &Dim) -> Dim {
        match x.value() {
            Some(q) if q.is_zero() => Compact(Q::zero()),
            _ => Infinity,
        }
    }

    fn encode(&self, x: &Dim) -> String {
        x.to_string()
    }
}

/// `{x ∈ N[1/p] ⊔ (0,1] : x ≤ 1} ∪ {∞}`: order and sum as in `S_p`, except that a
/// sum strictly above `1_c` is `∞`; the top `∞` is compact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncatedEp {
    p: u64,
}

impl TruncatedEp {
    pub fn new(p: u64) -> Result<TruncatedEp> {
        if !is_prime(p) {
            return Err(CuError::InvalidParameter(format!("{p} is not prime")));
        }
        Ok(TruncatedEp { p })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    fn truncate(&self, x: Dim) -> Dim {
        let one_c = Compact(Q::one());
        if sp_leq(&one_c, &x) && x != one_c {
            Infinity
        } else {
            x
        }
    }

    /// Stage element `x ∈ E_{p^k}` sent to `x / p^k`.
    pub fn embed_stage(&self, k: u32, x: ExtNat) -> Dim {
        match x {
            Fin(n) => self.truncate(Compact(Q::int(n as i64) / Q::pow_int(self.p, k))),
            Inf => Infinity,
        }
    }
}

impl CuSemigroup for TruncatedEp {
    type Elem = Dim;

    fn name(&self) -> String {
        format!("Ebar_{}", self.p)
    }

    fn zero(&self) -> Dim {
        Compact(Q::zero())
    }

    fn add(&self, a: &Dim, b: &Dim) -> Dim {
        self.truncate(sp_add(a, b))
    }

    fn leq(&self, a: &Dim, b: &Dim) -> bool {
        match (a, b) {
            (_, Infinity) => true,
            (Infinity, _) => false,
            _ => sp_leq(a, b),
        }
    }

    fn way_below(&self, a: &Dim, b: &Dim) -> bool {
        match (a, b) {
            (_, Infinity) => true,
            (Infinity, _) => false,
            _ => sp_way_below(a, b),
        }
    }

    /// Compact and soft values `k / p^depth` up to `1`, and `∞`.
    fn basis(&self, depth: usize) -> Vec<Dim> {
        let max_num = self.p.pow(depth as u32);
        let mut out: Vec<Dim> = dyadic_values(self.p, depth, max_num)
            .flat_map(|v| {
                let soft = (!v.is_zero()).then(|| Soft(v.clone()));
                std::iter::once(Compact(v)).chain(soft)
            })
            .collect();
        out.push(Infinity);
        out
    }

    fn interpolate(&self, lo: &Dim, hi: &Dim) -> Option<Dim> {
        if !self.way_below(lo, hi) {
            return None;
        }
        Some(match (lo, hi) {
            (Infinity, _) => Infinity,
            (Compact(_), Infinity) => lo.clone(),
            (Soft(_), Infinity) => Compact(Q::one()),
            _ => SoftDim { p: self.p }.interpolate(lo, hi)?,
        })
    }

    fn inf_multiple(&self, x: &Dim) -> Dim {
        match x.value() {
            Some(q) if q.is_zero() => Compact(Q::zero()),
            _ => Infinity,
        }
    }

    fn encode(&self, x: &Dim) -> String {
        x.to_string()
    }
}
