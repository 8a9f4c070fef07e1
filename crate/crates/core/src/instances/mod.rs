//! Concrete Cu-semigroups with exact arithmetic.

pub mod elementary;
pub mod extnat;
pub mod generator;
pub mod lsc;
pub mod simplicial;
pub mod softdim;

pub use elementary::{Elementary, TwoPoint};
pub use extnat::{ExtNat, ExtNatSg, Fin, Inf};
pub use generator::{GElem, GeneratorG};
pub use lsc::{Interval, LscInterval, StepLsc};
pub use simplicial::Simplicial;
pub use softdim::{softdim_embed_stage, Dim, SoftDim, TruncatedEp};

use crate::error::Result;

pub fn make_elementary(n: u64) -> Result<Elementary> {
    Elementary::new(n)
}

pub fn make_simplicial(r: usize) -> Result<Simplicial> {
    Simplicial::new(r)
}

pub fn make_softdim(p: u64) -> Result<SoftDim> {
    SoftDim::new(p)
}

pub fn make_truncated_ep(p: u64) -> Result<TruncatedEp> {
    TruncatedEp::new(p)
}

pub fn make_two_point() -> TwoPoint {
    TwoPoint
}

pub fn make_steplsc() -> LscInterval {
    LscInterval
}
