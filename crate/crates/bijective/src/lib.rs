//! Exhaustive comparison of online algorithms on small discrete metric
//! spaces: exact bijective ratios, stochastic dominance, Max/Max and average
//! ratios, computed over every request sequence of a given length, plus the
//! adversary constructions and decision-tree oracles used to verify the
//! optimality and ratio bounds shipped in the `verify` suites.

pub mod adversary;
pub mod analysis;
pub mod error;
pub mod kserver;
pub mod metric;
pub mod ordering;
pub mod paging;
pub mod rat;
pub mod rbm;
pub mod verify;

pub use error::{Error, Result};
pub use kserver::{dmin, dmin_u, AlgorithmSpec, Configuration, TieBreak, Trace};
pub use metric::{MetricKind, MetricSpace, MetricSpec, PointId};
pub use rat::Rat;
