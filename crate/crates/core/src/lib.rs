//! Transfer learning between linear regression tasks: estimators, generative
//! model, closed-form and fixed-point risk formulas, and a Monte Carlo harness
//! that checks one against the other.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod stats;

pub use error::{Error, Result};
