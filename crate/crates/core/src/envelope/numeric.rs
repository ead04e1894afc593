use crate::convex::ExtReal;
use crate::disjunctive::rank1::build_rank1_compact;
use crate::error::{Error, Result};
use crate::solver::{solve_relaxation, Certificate, SolveOptions, SolveStatus};

use super::instance::{EnvelopePoint, RankOneInstance};

/// Envelope value from the lifted rank-one program at a fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericEnvelope {
    pub value: ExtReal,
    /// False when the solver stopped short of its gap tolerance.
    pub accurate: bool,
    pub lambda: Vec<f64>,
    pub tau: Vec<f64>,
    pub certificate: Certificate,
}

/// Solves the lifted `(λ, τ)` program with `x` and `z` fixed.
pub fn envelope_numeric(inst: &RankOneInstance, p: &EnvelopePoint, tol: f64) -> Result<NumericEnvelope> {
    inst.check_point(p)?;
    let f = build_rank1_compact(inst)?.with_fixed("x", &p.x)?.with_fixed("z", &p.z)?;
    let r = solve_relaxation(&f, &SolveOptions::with_tol(tol))?;
    let pick = |group: &str| -> Vec<f64> {
        if r.point.is_empty() {
            Vec::new()
        } else {
            f.group(group).iter().map(|v| r.point[v.0]).collect()
        }
    };
    let value = match r.status {
        SolveStatus::Infeasible => ExtReal::PosInf,
        SolveStatus::Unbounded => return Err(Error::Solver("lifted envelope program reported unbounded".into())),
        _ => ExtReal::Finite(r.value),
    };
    Ok(NumericEnvelope {
        value,
        accurate: r.status != SolveStatus::Inexact,
        lambda: pick("lambda"),
        tau: pick("tau"),
        certificate: r.certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::UnivariateConvex;

    #[test]
    fn matches_small_examples() {
        let q = UnivariateConvex::quadratic(1.0).unwrap();
        let free = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![], q.clone()).unwrap();
        let p = EnvelopePoint::new(vec![1.0, 1.0], vec![0.5, 0.25]).unwrap();
        let r = envelope_numeric(&free, &p, 1e-9).unwrap();
        assert!(r.accurate);
        assert!((r.value.to_f64() - 16.0 / 3.0).abs() < 1e-6);

        let nonneg = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![0, 1], q.clone()).unwrap();
        let p = EnvelopePoint::new(vec![1.0, 2.0], vec![1.0, 0.5]).unwrap();
        assert!((envelope_numeric(&nonneg, &p, 1e-9).unwrap().value.to_f64() - 10.0).abs() < 1e-6);

        let p = EnvelopePoint::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(envelope_numeric(&nonneg, &p, 1e-9).unwrap().value, ExtReal::PosInf);

        let p = EnvelopePoint::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert!((envelope_numeric(&nonneg, &p, 1e-9).unwrap().value.to_f64() - 9.0).abs() < 1e-6);
    }
}
