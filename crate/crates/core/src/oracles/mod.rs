//! Brute-force ground truth, kept independent of the closed forms it checks.

pub mod disjunctive;
pub mod grid;
pub mod knapsack;
pub mod mip;
pub mod recession;

pub use disjunctive::{envelope_oracle_disjunctive, full_disjunction, DisjunctionOracle};
pub use grid::{envelope_oracle_grid, GridOracle};
pub use knapsack::{knapsack_reduce, verify_exhaustive, verify_reduction, ExhaustiveReport, KnapsackReduction, ReductionReport};
pub use mip::{mip_bruteforce, BruteForceResult, IndicatorLeastSquares};
pub use recession::recession_oracle_exhaustive;
