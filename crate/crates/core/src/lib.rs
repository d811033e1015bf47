//! Pareto records, record-setting regions and their generators for samples
//! with i.i.d. standard exponential coordinates.

pub mod acceptance;
pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod generators;
pub mod geometry;
pub mod montecarlo;
pub mod quadrature;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
pub use generators::{GeneratorSet, Support};
pub use geometry::{Point, RecordSet, TieMode};
