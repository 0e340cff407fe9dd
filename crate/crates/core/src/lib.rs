//! Exact lattices of experimental propositions for finite-dimensional quantum
//! mechanics, and conditional probability spaces built on them.
//!
//! All arithmetic is over the Gaussian rationals; nothing in the crate uses
//! floating point.

pub mod bell;
pub mod cli;
pub mod clqm;
pub mod context;
pub mod cps;
pub mod error;
pub mod fixtures;
pub mod lqm;
pub mod matrix;
pub mod scalar;
pub mod scenario;
pub mod slattice;

pub use error::{Error, Result};
