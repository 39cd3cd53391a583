//! Exact computations on rank-one cutting-and-stacking transformations.

pub mod arith;
pub mod cache;
pub mod config;
pub mod construction;
pub mod descendants;
pub mod epsilon;
pub mod error;
pub mod geometry;
mod kernel;
pub mod oracle;
pub mod statistics;
pub mod suites;

pub use arith::Rational;
pub use cache::HistogramCache;
pub use construction::{ConstructionSpec, Family, StageSpec};
pub use descendants::{Budgets, Correlator, DescendantSet, DiffHistogram, KernelChoice, Level, LevelSet};
pub use error::{Error, Result};
pub use geometry::TowerGeometry;
