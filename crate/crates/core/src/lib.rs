//! Numerical toolkit for strong quasiconvexity: norms, convex sets, sampled
//! estimators of the quasiconvexity modulus, and a suite of reproducible
//! checks.

pub mod error;
pub mod geometry;
pub mod sets;
pub mod cli;
pub mod engine;
pub mod report;
pub mod suite;

pub use error::{Result, SqcError};
