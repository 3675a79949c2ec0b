//! Lead-lag analysis of paired time series with the symmetric thermal
//! optimal path method, plus the data preparation, classical statistics,
//! self-consistency regression and synthetic benchmarks around it.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod selfconsistent;
pub mod series_prep;
pub mod stats;
pub mod synthetic;
pub mod tops;

pub use error::{Error, ErrorClass, Result};
