//! Convex hulls and envelopes of low-rank convex functions with indicator variables.

pub mod convex;
pub mod disjunctive;
pub mod envelope;
pub mod error;
pub mod instances;
pub mod oracles;
pub mod solver;

pub use error::{Error, Result};
