//! Coprime-array coarray processing: snapshot simulation, coarray
//! autocorrelation matrix estimation (augmented-matrix, principal square
//! root, and structured alternating-projection estimators), MUSIC DoA
//! estimation, and a seeded Monte Carlo experiment harness.

pub mod array;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod music;
pub mod sampling;
pub mod snapshot;

pub use error::{Error, Result};
