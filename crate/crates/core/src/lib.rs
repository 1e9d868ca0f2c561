//! Possibilistic inferential models: contours, associations, the worked
//! models, baselines and validity checks.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod auxiliary;
pub mod baselines;
pub mod cli;
pub mod credal;
pub mod dataset;
pub mod dominance;
pub mod error;
pub mod harness;
pub mod models;
pub mod numerics;
pub mod possibility;
pub mod randomset;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
