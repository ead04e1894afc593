pub mod bnb;
pub mod relax;

pub use bnb::{branch_and_bound, BnbOptions, BnbResult, Termination};
pub use relax::{solve_relaxation, Certificate, RelaxationResult, SolveOptions, SolveStatus};
