//! Exact computations with abstract Cuntz semigroups: concrete instances and
//! their morphisms, finite-set comparison, Cauchy limits and intertwinings,
//! Fraïssé categories, piecewise-linear tools and Hom-set metrics.

pub mod error;
pub mod fraisse;
pub mod hom;
pub mod instances;
pub mod limit;
pub mod metrics;
pub mod pl;
pub mod rational;
pub mod semigroup;

pub use error::{CuError, Result};
pub use rational::{q, Q};
pub use semigroup::{
    check_axioms, compare_maps, n_refinement, AxiomReport, CuSemigroup, Element, FiniteSubset,
};
