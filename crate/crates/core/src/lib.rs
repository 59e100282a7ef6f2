//! Incremental decision trees for data streams.
//!
//! The crate implements the VFDT family of Hoeffding trees (plain VFDT plus
//! the stricter SVFDT-I and SVFDT-II split policies), an optional leaf-local
//! online boosting layer that sharpens predictions without touching tree
//! growth, synthetic stream generators, CSV streams, and a prequential
//! evaluation harness with paired significance testing.

pub mod boost;
pub mod eval;
pub mod plan;
pub mod policy;
pub mod predict;
pub mod rng;
pub mod stats;
pub mod stream;
pub mod tree;
