//! Round-trip synthesizability evaluation.

pub mod chem;
pub mod corpus;
pub mod metrics;
pub mod num;
pub mod network;
pub mod planner;
pub mod reaction;
pub mod simulate;
pub mod templates;

pub use num::Scalar;

/// Floating-point scalar used for scores in records and reports.
pub type Score = f64;
/// Exact rational scalar, for checking arithmetic without rounding.
pub type ExactRatio = num_rational::Ratio<i64>;
