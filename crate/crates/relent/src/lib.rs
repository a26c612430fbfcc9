//! relent: topological entropy of finite closed relations.
//!
//! The crate models a finite relation `G` on a labeled metric point set,
//! enumerates and counts walks of the Mahavier products of `G⁻¹`, computes
//! the entropy of the relation exactly, detects (k,ε)-returns and
//! well-aligned subsets, builds dispersions (binary trees of return blocks
//! whose concatenations stay ε-separated), classifies orbit pairs of the
//! shift map, and machine-checks the equivalence of four characterizations
//! of positive entropy for finite relations.
//!
//! Start with the runnable examples (`cargo run --example ...`) or the
//! `relent` binary, both thin layers over this library.

pub mod chaos;
pub mod cli;
pub mod dispersion;
pub mod document;
pub mod entropy;
pub mod error;
pub mod exact;
pub mod fixtures;
mod graph;
pub mod grid;
pub mod point_set;
pub mod relation;
pub mod returns;

pub use error::{Error, Result};
pub use point_set::{Dist, Metric, PointId, PointSet};
pub use relation::{star_concat, FiniteRelation, SymbolicOrbit, Walk, DEFAULT_WALK_BUDGET};
