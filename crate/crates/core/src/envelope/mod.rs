//! Convex envelopes of rank-one functions `g(aᵀx) + cᵀx` with indicators.

pub mod closed;
pub mod instance;
pub mod kkt;
pub mod numeric;
pub mod partition;

pub use closed::{envelope_bivariate, envelope_free, envelope_nonneg, envelope_nonneg_samesign};
pub use instance::{EnvelopePoint, RankOneInstance, Side};
pub use kkt::{kkt_solve_case1, kkt_solve_case2, KktResiduals, KktSolution};
pub use numeric::{envelope_numeric, NumericEnvelope};
pub use partition::{partition_search, partition_search_samesign, PartitionLMU};

use crate::convex::ExtReal;
use crate::error::Result;

/// Default tolerance for the numeric route of [`envelope`].
pub const NUMERIC_TOL: f64 = 1e-8;

/// Picks the closed form matching the sign constraints: the free case when
/// no variable is constrained, the nonnegative case when all are, and the
/// numeric route otherwise.
pub fn envelope(inst: &RankOneInstance, p: &EnvelopePoint) -> Result<ExtReal> {
    if inst.is_free() {
        envelope_free(inst, p)
    } else if inst.is_nonneg() {
        envelope_nonneg(inst, p)
    } else {
        Ok(envelope_numeric(inst, p, NUMERIC_TOL)?.value)
    }
}
