//! Computational models of CAT(0) spaces and their boundaries at infinity.

// `!(x >= 0.0)` style guards are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_metrics;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod quasi_isometry;
pub mod rescaling;
pub mod sampling;
pub mod space_models;

pub use error::{Error, Result};
