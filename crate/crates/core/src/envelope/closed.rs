//! Closed-form envelopes of rank-one functions with indicators.

use crate::convex::ExtReal;
use crate::error::{Error, Result};

use super::instance::{EnvelopePoint, RankOneInstance, Side};
use super::numeric::envelope_numeric;
use super::partition::{partition_search_data, partition_search_samesign, PartitionLMU, SideData, PARTITION_TOL};

/// Tolerance used when a borderline partition is re-evaluated numerically.
const BORDERLINE_TOL: f64 = 1e-9;

/// Envelope when no variable is sign constrained:
/// `g^π(aᵀx, min{1, Σz}) + cᵀx + offset`.
pub fn envelope_free(inst: &RankOneInstance, p: &EnvelopePoint) -> Result<ExtReal> {
    inst.check_point(p)?;
    if !inst.is_free() {
        return Err(Error::WrongCase("the free-case envelope needs every variable unconstrained".into()));
    }
    let mass = p.z.iter().sum::<f64>().min(1.0);
    Ok(inst.g.perspective(inst.ax(&p.x), mass)? + inst.affine_part(&p.x))
}

/// Value of the three-term formula for a given partition, without the affine part.
pub fn partition_value(inst: &RankOneInstance, data: &SideData, part: &PartitionLMU) -> Result<ExtReal> {
    let s = part.side.sign();
    let sc = part.scalars(data);
    let g = &inst.g;
    let mut total = ExtReal::ZERO;
    if !part.l.is_empty() {
        total = total + g.perspective(s * sc.w_l, sc.zbar)?;
    }
    for &i in &part.m {
        total = total + g.perspective(s * data.w[i], data.z[i])?;
    }
    let cbar = if part.u.is_empty() && sc.cbar.abs() <= PARTITION_TOL * data.w_dom.max(1.0) {
        0.0
    } else {
        sc.cbar
    };
    total = total + g.perspective(s * cbar, sc.z_u)?;
    Ok(total)
}

fn require_nonneg(inst: &RankOneInstance, p: &EnvelopePoint) -> Result<()> {
    inst.check_point(p)?;
    if !inst.is_nonneg() {
        return Err(Error::WrongCase("this envelope needs every variable nonnegative".into()));
    }
    Ok(())
}

/// Envelope when every variable is nonnegative, for arbitrary coefficient signs.
///
/// Points where the partition is only valid within tolerance are evaluated
/// by [`envelope_numeric`] instead.
pub fn envelope_nonneg(inst: &RankOneInstance, p: &EnvelopePoint) -> Result<ExtReal> {
    require_nonneg(inst, p)?;
    let data = SideData::new(inst, p);
    match partition_search_data(&data) {
        None => Ok(ExtReal::Finite(inst.f(&p.x))),
        Some(part) if part.borderline => borderline_value(inst, p, &data, &part),
        Some(part) => Ok(partition_value(inst, &data, &part)? + inst.affine_part(&p.x)),
    }
}

fn borderline_value(inst: &RankOneInstance, p: &EnvelopePoint, data: &SideData, part: &PartitionLMU) -> Result<ExtReal> {
    match envelope_numeric(inst, p, BORDERLINE_TOL) {
        Ok(r) if r.accurate => Ok(r.value),
        _ => Ok(partition_value(inst, data, part)? + inst.affine_part(&p.x)),
    }
}

/// Envelope when every variable is nonnegative and every `a_i > 0`.
pub fn envelope_nonneg_samesign(inst: &RankOneInstance, p: &EnvelopePoint) -> Result<ExtReal> {
    require_nonneg(inst, p)?;
    if !inst.is_same_sign_positive() {
        return Err(Error::WrongCase("the same-sign envelope needs every a_i > 0".into()));
    }
    let data = SideData::new(inst, p);
    match partition_search_samesign(inst, p) {
        None => match envelope_numeric(inst, p, BORDERLINE_TOL) {
            Ok(r) => Ok(r.value),
            Err(e) => Err(e),
        },
        Some(part) if part.borderline => borderline_value(inst, p, &data, &part),
        Some(part) => Ok(partition_value(inst, &data, &part)? + inst.affine_part(&p.x)),
    }
}

/// Envelope of `g(a₁x₁ + a₂x₂)` with `x ≥ 0` and `a₁, a₂` of opposite signs:
/// `g^π(aᵀx, z_d)` where `d` is the dominant index.
pub fn envelope_bivariate(inst: &RankOneInstance, p: &EnvelopePoint) -> Result<ExtReal> {
    require_nonneg(inst, p)?;
    if inst.n() != 2 || inst.a[0].signum() == inst.a[1].signum() {
        return Err(Error::WrongCase("the bivariate envelope needs n = 2 with coefficients of opposite signs".into()));
    }
    let (pos, neg) = if inst.a[0] > 0.0 { (0, 1) } else { (1, 0) };
    let wp = inst.a[pos] * p.x[pos];
    let wn = -inst.a[neg] * p.x[neg];
    let dominant = if wp > wn { pos } else { neg };
    Ok(inst.g.perspective(wp - wn, p.z[dominant])? + inst.affine_part(&p.x))
}

/// Which side dominates at `p`.
pub fn dominant_side(inst: &RankOneInstance, p: &EnvelopePoint) -> Side {
    SideData::new(inst, p).side
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::UnivariateConvex;

    fn q() -> UnivariateConvex {
        UnivariateConvex::quadratic(1.0).unwrap()
    }

    fn pt(x: &[f64], z: &[f64]) -> EnvelopePoint {
        EnvelopePoint::new(x.to_vec(), z.to_vec()).unwrap()
    }

    #[test]
    fn free_case_examples() {
        let inst = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![], q()).unwrap();
        let v = envelope_free(&inst, &pt(&[1.0, 1.0], &[0.5, 0.25])).unwrap();
        assert!((v.to_f64() - 16.0 / 3.0).abs() < 1e-12);
        assert_eq!(envelope_free(&inst, &pt(&[1.0, 1.0], &[1.0, 1.0])).unwrap(), ExtReal::Finite(4.0));
        assert_eq!(envelope_free(&inst, &pt(&[0.0, 0.0], &[0.0, 0.0])).unwrap(), ExtReal::Finite(0.0));
        let nonneg = RankOneInstance::homogeneous(vec![1.0], vec![0], q()).unwrap();
        assert!(matches!(envelope_free(&nonneg, &pt(&[1.0], &[1.0])), Err(Error::WrongCase(_))));
    }

    #[test]
    fn nonneg_examples() {
        let inst = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![0, 1], q()).unwrap();
        let p = pt(&[1.0, 2.0], &[1.0, 0.5]);
        assert!((envelope_nonneg(&inst, &p).unwrap().to_f64() - 10.0).abs() < 1e-12);
        assert!((envelope_nonneg_samesign(&inst, &p).unwrap().to_f64() - 10.0).abs() < 1e-12);
        let one = pt(&[1.0, 2.0], &[1.0, 1.0]);
        assert_eq!(envelope_nonneg(&inst, &one).unwrap(), ExtReal::Finite(9.0));

        let mixed = RankOneInstance::homogeneous(vec![1.0, -1.0], vec![0, 1], q()).unwrap();
        let p = pt(&[2.0, 1.0], &[0.5, 1.0]);
        assert!((envelope_nonneg(&mixed, &p).unwrap().to_f64() - 2.0).abs() < 1e-12);
        assert!((envelope_bivariate(&mixed, &p).unwrap().to_f64() - 2.0).abs() < 1e-12);
        let p = pt(&[0.0, 3.0], &[1.0, 0.25]);
        assert!((envelope_bivariate(&mixed, &p).unwrap().to_f64() - 36.0).abs() < 1e-12);
        assert!((envelope_nonneg(&mixed, &p).unwrap().to_f64() - 36.0).abs() < 1e-12);
        let p = pt(&[1.5, 1.5], &[0.3, 0.7]);
        assert_eq!(envelope_bivariate(&mixed, &p).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn samesign_boundary_cases() {
        let inst = RankOneInstance::homogeneous(vec![1.0, 2.0], vec![0, 1], q()).unwrap();
        // z(M) = 1 with L empty
        let p = pt(&[1.0, 1.0], &[0.5, 0.5]);
        let v = envelope_nonneg_samesign(&inst, &p).unwrap().to_f64();
        assert!((v - (1.0 / 0.5 + 4.0 / 0.5)).abs() < 1e-12);
        // weight on an index with z = 0 costs the recession value
        let p = pt(&[1.0, 1.0], &[0.5, 0.0]);
        assert_eq!(envelope_nonneg_samesign(&inst, &p).unwrap(), ExtReal::PosInf);
        assert_eq!(envelope_nonneg(&inst, &p).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn affine_part_is_added() {
        let base = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![0, 1], q()).unwrap();
        let mut inst = base.clone();
        inst.c = vec![0.5, -1.0];
        inst.offset = 2.0;
        let p = pt(&[1.0, 2.0], &[1.0, 0.5]);
        let v = envelope_nonneg(&inst, &p).unwrap().to_f64();
        assert!((v - (10.0 + 0.5 - 2.0 + 2.0)).abs() < 1e-12);
    }
}
