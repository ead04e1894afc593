//! One-dimensional convex functions and their perspective calculus.

mod extreal;
mod univariate;

pub use extreal::ExtReal;
pub use univariate::{Breakpoint, Slope, UnivariateConvex, DIFF_TOL, INVERSE_TOL};
