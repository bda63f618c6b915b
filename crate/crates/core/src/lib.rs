//! Upper and lower bounds on the differential entropy rate of stationary
//! processes, and the numerical oracles used to check them.
//!
//! Bounds live in [`bounds`], regularity constants in [`regularity`], and
//! the estimators used as ground truth (quadrature, kNN, Monte Carlo
//! divergence, Wasserstein distances) in [`estimators`]. [`experiment`]
//! ties them into configurable runs with CSV and JSON output.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod corpus;
pub mod density;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod linalg;
pub mod numeric;
pub mod regularity;
pub mod sample;
pub mod simulate;
pub mod spectra;
pub mod toeplitz;
pub mod validation;

pub use error::{Error, Result};
