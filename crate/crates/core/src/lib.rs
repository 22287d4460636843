//! Person-following distance estimation by fusing a shoulder-hip keypoint
//! model with a depth camera measurement.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod depth;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod metrics;
pub mod monocular;
pub mod sim;
mod outlier;

pub use error::{Error, Result};
