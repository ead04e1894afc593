//! Closed-form primal-dual solutions of the inner envelope program
//!
//! `min Σ_{i∈P} λ_i g(τ_i/λ_i)` s.t. `Σ τ_i = C`, `τ_i ≤ w_i`, `λ_i ≤ z_i`,
//! `Σ λ_i ≤ 1` (dual `δ`), `λ, τ ≥ 0`,
//!
//! with `C = w(dominant side) − w(other side)`. `τ` and the ratios `τ_i/λ_i`
//! are in weighted units `|a_i| x_i`; on the negative side `g` is applied to
//! `−s`. Stationarity reads `g′(r_i) − α + β_i = 0` and
//! `−G(r_i) + δ + γ_i = 0`, where `β, γ ≥ 0` price `τ ≤ w` and `λ ≤ z`.

use serde::{Deserialize, Serialize};

use crate::convex::UnivariateConvex;
use crate::error::{Error, Result};

use super::instance::{EnvelopePoint, RankOneInstance, Side};
use super::partition::{PartitionLMU, SideData};

/// Residual tolerance for the returned solutions.
pub const KKT_TOL: f64 = 1e-8;

/// Largest relative violation in each block of the optimality conditions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.dual).max(self.complementarity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktSolution {
    pub side: Side,
    /// Indexed by original variable; zero off the support.
    pub lambda: Vec<f64>,
    pub tau: Vec<f64>,
    /// `τ_i / λ_i` on the support.
    pub ratios: Vec<Option<f64>>,
    pub alpha: f64,
    /// `None` when `Σλ ≤ 1` is not priced (second case).
    pub delta: Option<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub cbar: f64,
    pub zbar: f64,
    /// Objective value `Σ λ_i g(±r_i)`.
    pub value: f64,
    pub residuals: KktResiduals,
}

/// `g` composed with the side's sign.
struct Oriented<'a> {
    g: &'a UnivariateConvex,
    s: f64,
}

impl Oriented<'_> {
    fn eval(&self, r: f64) -> f64 {
        self.g.eval(self.s * r)
    }

    fn deriv(&self, r: f64) -> Result<f64> {
        Ok(self.s * self.g.derivative(self.s * r)?)
    }

    fn big_g(&self, r: f64) -> Result<f64> {
        Ok(r * self.deriv(r)? - self.eval(r))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Case {
    One,
    Two,
}

/// Case `z(P) > 1`: `Σλ = 1` is active.
pub fn kkt_solve_case1(inst: &RankOneInstance, p: &EnvelopePoint, part: &PartitionLMU) -> Result<KktSolution> {
    solve(inst, p, part, Case::One)
}

/// Case `z(P) ≤ 1`: `λ = z` and `L = ∅`.
pub fn kkt_solve_case2(inst: &RankOneInstance, p: &EnvelopePoint, part: &PartitionLMU) -> Result<KktSolution> {
    solve(inst, p, part, Case::Two)
}

fn solve(inst: &RankOneInstance, p: &EnvelopePoint, part: &PartitionLMU, case: Case) -> Result<KktSolution> {
    inst.check_point(p)?;
    if !inst.is_nonneg() {
        return Err(Error::WrongCase("closed-form KKT solutions need every variable nonnegative".into()));
    }
    let data = SideData::new(inst, p);
    if data.side != part.side {
        return Err(Error::InfeasiblePartition("partition side differs from the dominant side".into()));
    }
    let mut support: Vec<usize> = part.l.iter().chain(&part.m).chain(&part.u).copied().collect();
    support.sort_unstable();
    let mut expected = data.sorted.clone();
    expected.sort_unstable();
    if support != expected {
        return Err(Error::InfeasiblePartition("blocks do not cover the support with positive z".into()));
    }
    if !part.zero_z.is_empty() {
        return Err(Error::InfeasiblePartition("support indices with z = 0 have no closed-form multiplier".into()));
    }
    let z_p = data.z_sum(&data.sorted);
    match case {
        Case::One if z_p <= 1.0 => {
            return Err(Error::InfeasiblePartition(format!("first case needs z(P) > 1, got {z_p}")));
        }
        Case::Two if z_p > 1.0 => {
            return Err(Error::InfeasiblePartition(format!("second case needs z(P) ≤ 1, got {z_p}")));
        }
        Case::Two if !part.l.is_empty() => {
            return Err(Error::InfeasiblePartition("second case needs L = ∅".into()));
        }
        _ => {}
    }
    let n = inst.n();
    let g = Oriented { g: &inst.g, s: part.side.sign() };
    let sc = part.scalars(&data);
    let big_c = data.w_dom - data.w_other;

    let mut lambda = vec![0.0; n];
    let mut tau = vec![0.0; n];
    if !part.l.is_empty() {
        if sc.zbar <= 0.0 || sc.w_l <= 0.0 {
            return Err(Error::InfeasiblePartition(format!("L needs zbar > 0, got {}", sc.zbar)));
        }
        for &i in &part.l {
            lambda[i] = sc.zbar * data.w[i] / sc.w_l;
            tau[i] = data.w[i];
        }
    }
    for &i in &part.m {
        lambda[i] = data.z[i];
        tau[i] = data.w[i];
    }
    if !part.u.is_empty() {
        if sc.z_u <= 0.0 {
            return Err(Error::InfeasiblePartition("U needs z(U) > 0".into()));
        }
        for &i in &part.u {
            lambda[i] = data.z[i];
            tau[i] = sc.cbar * data.z[i] / sc.z_u;
        }
    }
    let mut ratios = vec![None; n];
    for &i in &support {
        ratios[i] = Some(tau[i] / lambda[i]);
    }
    let r = |i: usize| ratios[i].expect("support index");

    let lm: Vec<usize> = part.l.iter().chain(&part.m).copied().collect();
    let mu: Vec<usize> = part.m.iter().chain(&part.u).copied().collect();
    let alpha = if !part.u.is_empty() {
        g.deriv(sc.cbar / sc.z_u)?
    } else {
        let mut best = f64::NEG_INFINITY;
        for &i in &lm {
            best = best.max(g.deriv(r(i))?);
        }
        if best == f64::NEG_INFINITY {
            0.0
        } else {
            best
        }
    };
    let delta = match case {
        Case::Two => None,
        Case::One if !part.l.is_empty() => Some(g.big_g(sc.w_l / sc.zbar)?),
        Case::One => {
            let mut best = f64::INFINITY;
            for &i in &mu {
                best = best.min(g.big_g(r(i))?);
            }
            Some(if best == f64::INFINITY { 0.0 } else { best })
        }
    };
    let d = delta.unwrap_or(0.0);
    let mut beta = vec![0.0; n];
    let mut gamma = vec![0.0; n];
    for &i in &lm {
        beta[i] = alpha - g.deriv(r(i))?;
    }
    for &i in &mu {
        gamma[i] = g.big_g(r(i))? - d;
    }

    // Plug everything back into the optimality conditions.
    let mut res = KktResiduals::default();
    let upd = |slot: &mut f64, v: f64| *slot = slot.max(v);
    for &i in &support {
        let ri = r(i);
        let gp = g.deriv(ri)?;
        let gg = g.big_g(ri)?;
        upd(&mut res.stationarity, (gp - alpha + beta[i]).abs() / (1.0 + alpha.abs() + gp.abs()));
        upd(&mut res.stationarity, (-gg + d + gamma[i]).abs() / (1.0 + gg.abs() + d.abs()));
        upd(&mut res.primal, (tau[i] - data.w[i]).max(0.0) / (1.0 + data.w[i]));
        upd(&mut res.primal, (-tau[i]).max(0.0));
        upd(&mut res.primal, (lambda[i] - data.z[i]).max(0.0));
        upd(&mut res.primal, (-lambda[i]).max(0.0));
        upd(&mut res.dual, (-beta[i]).max(0.0) / (1.0 + alpha.abs()));
        upd(&mut res.dual, (-gamma[i]).max(0.0) / (1.0 + d.abs() + gg.abs()));
        upd(&mut res.complementarity, (beta[i] * (data.w[i] - tau[i])).abs() / (1.0 + beta[i].abs() * data.w[i]));
        upd(&mut res.complementarity, (gamma[i] * (data.z[i] - lambda[i])).abs() / (1.0 + gamma[i].abs()));
    }
    let tau_sum: f64 = support.iter().map(|&i| tau[i]).sum();
    let lam_sum: f64 = support.iter().map(|&i| lambda[i]).sum();
    upd(&mut res.primal, (tau_sum - big_c).abs() / (1.0 + big_c.abs()));
    match case {
        Case::One => upd(&mut res.primal, (lam_sum - 1.0).abs()),
        Case::Two => upd(&mut res.primal, (lam_sum - 1.0).max(0.0)),
    }
    upd(&mut res.dual, (-d).max(0.0));
    upd(&mut res.complementarity, (d * (1.0 - lam_sum)).abs() / (1.0 + d.abs()));

    if res.max() > KKT_TOL {
        return Err(Error::InfeasiblePartition(describe_violation(&res, &support, &beta, &gamma, delta)));
    }
    let value = support.iter().map(|&i| lambda[i] * g.eval(r(i))).sum();
    Ok(KktSolution {
        side: part.side,
        lambda,
        tau,
        ratios,
        alpha,
        delta,
        beta,
        gamma,
        cbar: sc.cbar,
        zbar: sc.zbar,
        value,
        residuals: res,
    })
}

fn describe_violation(res: &KktResiduals, support: &[usize], beta: &[f64], gamma: &[f64], delta: Option<f64>) -> String {
    let mut parts = Vec::new();
    for &i in support {
        if beta[i] < -KKT_TOL {
            parts.push(format!("beta_{} = {:e} < 0", i + 1, beta[i]));
        }
        if gamma[i] < -KKT_TOL {
            parts.push(format!("gamma_{} = {:e} < 0", i + 1, gamma[i]));
        }
    }
    if let Some(d) = delta {
        if d < -KKT_TOL {
            parts.push(format!("delta = {d:e} < 0"));
        }
    }
    if parts.is_empty() {
        parts.push(format!(
            "residuals stationarity {:e}, primal {:e}, dual {:e}, complementarity {:e}",
            res.stationarity, res.primal, res.dual, res.complementarity
        ));
    }
    parts.join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::partition::partition_search;

    #[test]
    fn two_index_case_one() {
        let q = UnivariateConvex::quadratic(1.0).unwrap();
        let inst = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![0, 1], q).unwrap();
        let p = EnvelopePoint::new(vec![1.0, 2.0], vec![1.0, 0.5]).unwrap();
        let part = partition_search(&inst, &p).unwrap();
        let sol = kkt_solve_case1(&inst, &p, &part).unwrap();
        assert!((sol.value - 10.0).abs() < 1e-12);
        assert_eq!(sol.lambda, vec![0.5, 0.5]);
        assert!(sol.residuals.max() <= KKT_TOL);
        assert!(kkt_solve_case2(&inst, &p, &part).is_err());
    }

    #[test]
    fn wrong_partition_reports_violation() {
        let q = UnivariateConvex::quadratic(1.0).unwrap();
        let inst = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![0, 1], q).unwrap();
        let p = EnvelopePoint::new(vec![1.0, 2.0], vec![1.0, 0.5]).unwrap();
        let bad = PartitionLMU {
            side: Side::Plus,
            l: vec![],
            m: vec![1],
            u: vec![0],
            zero_z: vec![],
            borderline: false,
        };
        let err = kkt_solve_case1(&inst, &p, &bad).unwrap_err();
        assert!(matches!(err, Error::InfeasiblePartition(ref s) if s.contains("beta_2")), "{err}");
    }

    #[test]
    fn case_two_all_in_m() {
        let q = UnivariateConvex::quadratic(1.0).unwrap();
        let inst = RankOneInstance::homogeneous(vec![1.0, 2.0, -1.0], vec![0, 1, 2], q).unwrap();
        let p = EnvelopePoint::new(vec![1.0, 0.5, 0.0], vec![0.3, 0.4, 0.9]).unwrap();
        let part = partition_search(&inst, &p).unwrap();
        let sol = kkt_solve_case2(&inst, &p, &part).unwrap();
        let expect = 1.0 / 0.3 + 1.0 / 0.4;
        assert!((sol.value - expect).abs() < 1e-12);
    }
}
