//! Compact lifted formulations of rank-one functions with indicators.
//!
//! All builders share the variable layout `x1..xn`, `z1..zn` (binary), `t`
//! and minimize `t + cᵀx + offset`.

use crate::convex::UnivariateConvex;
use crate::envelope::RankOneInstance;
use crate::error::{Error, Result};

use super::model::{ConeFunction, ExtendedFormulation, LinExpr, Sense, VarId};

struct Base {
    f: ExtendedFormulation,
    x: Vec<VarId>,
    z: Vec<VarId>,
    t: VarId,
}

fn base(name: &str, inst: &RankOneInstance) -> Base {
    let n = inst.n();
    let mut f = ExtendedFormulation::new(name);
    let x: Vec<VarId> = (0..n)
        .map(|i| {
            let lower = inst.iplus.binary_search(&i).is_ok().then_some(0.0);
            f.add_var(format!("x{}", i + 1), lower, None)
        })
        .collect();
    let z: Vec<VarId> = (0..n).map(|i| f.binary_var(format!("z{}", i + 1))).collect();
    let t = f.free_var("t");
    let mut obj = LinExpr::var(t);
    for i in 0..n {
        if inst.c[i] != 0.0 {
            obj.add_term(x[i], inst.c[i]);
        }
    }
    f.objective = obj;
    f.offset = inst.offset;
    f.set_group("x", x.clone());
    f.set_group("z", z.clone());
    f.set_group("t", vec![t]);
    Base { f, x, z, t }
}

/// Multipliers `λ` with `λ_i ≤ z_i` and `Σλ ≤ 1`.
fn multipliers(b: &mut Base) -> Vec<VarId> {
    let n = b.x.len();
    let lam: Vec<VarId> = (0..n).map(|i| b.f.nonneg_var(format!("lambda{}", i + 1))).collect();
    for i in 0..n {
        b.f.add_row(format!("ind{}", i + 1), LinExpr::var(lam[i]).plus(b.z[i], -1.0), Sense::Le, 0.0);
    }
    b.f.add_row("simplex", LinExpr::sum_of(lam.iter().copied()), Sense::Le, 1.0);
    b.f.set_group("lambda", lam.clone());
    lam
}

/// Offsets `τ` with `aᵀτ = 0` and `0 ≤ τ_i ≤ x_i` on the nonnegative indices.
fn offsets(b: &mut Base, inst: &RankOneInstance) -> Vec<VarId> {
    let n = b.x.len();
    let tau: Vec<VarId> = (0..n)
        .map(|i| {
            let lower = inst.iplus.binary_search(&i).is_ok().then_some(0.0);
            b.f.add_var(format!("tau{}", i + 1), lower, None)
        })
        .collect();
    let mut bal = LinExpr::zero();
    for i in 0..n {
        bal.add_term(tau[i], inst.a[i]);
    }
    b.f.add_row("balance", bal, Sense::Eq, 0.0);
    for &i in &inst.iplus {
        b.f.add_row(format!("tau_cap{}", i + 1), LinExpr::var(tau[i]).plus(b.x[i], -1.0), Sense::Le, 0.0);
    }
    b.f.set_group("tau", tau.clone());
    tau
}

/// `t ≥ Σ t_i`.
fn epigraph(b: &mut Base, parts: &[(VarId, f64)]) {
    let mut e = LinExpr::var(b.t);
    for &(v, coef) in parts {
        e.add_term(v, -coef);
    }
    b.f.add_row("epi", e, Sense::Ge, 0.0);
}

/// `t ≥ Σ g^π(a_i(x_i − τ_i), λ_i)` with `aᵀτ = 0`, `0 ≤ τ_i ≤ x_i` on the
/// nonnegative indices, `λ_i ≤ z_i ≤ 1`, `λ ≥ 0`, `Σλ ≤ 1`.
pub fn build_rank1_compact(inst: &RankOneInstance) -> Result<ExtendedFormulation> {
    inst.validate()?;
    let mut b = base("rank1-compact", inst);
    let lam = multipliers(&mut b);
    let tau = offsets(&mut b, inst);
    let mut parts = Vec::new();
    for i in 0..inst.n() {
        let ti = b.f.free_var(format!("t{}", i + 1));
        let input = LinExpr::term(b.x[i], inst.a[i]).plus(tau[i], -inst.a[i]);
        b.f.add_perspective(
            format!("persp{}", i + 1),
            ti,
            vec![input],
            LinExpr::var(lam[i]),
            ConeFunction::Univariate { g: inst.g.clone() },
        );
        parts.push((ti, 1.0));
    }
    epigraph(&mut b, &parts);
    Ok(b.f)
}

/// Specialization for nonnegative variables with positive coefficients, where
/// `τ = 0` is forced: `t ≥ Σ g^π(a_i x_i, λ_i)`.
pub fn build_rank1_nonneg_compact(inst: &RankOneInstance) -> Result<ExtendedFormulation> {
    inst.validate()?;
    if !inst.is_nonneg() || !inst.is_same_sign_positive() {
        return Err(Error::WrongCase("needs every variable nonnegative and every a_i > 0".into()));
    }
    let mut b = base("rank1-nonneg", inst);
    let lam = multipliers(&mut b);
    let mut parts = Vec::new();
    for i in 0..inst.n() {
        let ti = b.f.free_var(format!("t{}", i + 1));
        b.f.add_perspective(
            format!("persp{}", i + 1),
            ti,
            vec![LinExpr::term(b.x[i], inst.a[i])],
            LinExpr::var(lam[i]),
            ConeFunction::Univariate { g: inst.g.clone() },
        );
        parts.push((ti, 1.0));
    }
    epigraph(&mut b, &parts);
    Ok(b.f)
}

/// Quadratic `g(s) = q·s²` written with rotated cones:
/// `λ_i u_i ≥ (x_i − τ_i)²`, `u ≥ 0`, `t ≥ q Σ a_i² u_i`, plus the rows of
/// [`build_rank1_compact`].
pub fn build_conic_quadratic(inst: &RankOneInstance) -> Result<ExtendedFormulation> {
    inst.validate()?;
    let coef = match inst.g {
        UnivariateConvex::Quadratic { coef } => coef,
        UnivariateConvex::PowerAbs { p } if p == 2.0 => 1.0,
        _ => return Err(Error::WrongCase("the conic quadratic form needs a quadratic g".into())),
    };
    let mut b = base("rank1-conic", inst);
    let lam = multipliers(&mut b);
    let tau = offsets(&mut b, inst);
    let mut parts = Vec::new();
    let mut us = Vec::new();
    for i in 0..inst.n() {
        let u = b.f.nonneg_var(format!("u{}", i + 1));
        b.f.add_rotated(
            format!("rot{}", i + 1),
            u,
            LinExpr::var(lam[i]),
            vec![LinExpr::var(b.x[i]).plus(tau[i], -1.0)],
        );
        parts.push((u, coef * inst.a[i] * inst.a[i]));
        us.push(u);
    }
    b.f.set_group("u", us);
    epigraph(&mut b, &parts);
    Ok(b.f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_relaxation, SolveOptions};

    fn value_at(f: &ExtendedFormulation, x: &[f64], z: &[f64]) -> f64 {
        let g = f.with_fixed("x", x).unwrap().with_fixed("z", z).unwrap();
        solve_relaxation(&g, &SolveOptions::default()).unwrap().value
    }

    #[test]
    fn single_variable_forms() {
        let q = UnivariateConvex::quadratic(1.0).unwrap();
        let inst = RankOneInstance::homogeneous(vec![1.0], vec![0], q).unwrap();
        for f in [
            build_rank1_compact(&inst).unwrap(),
            build_rank1_nonneg_compact(&inst).unwrap(),
            build_conic_quadratic(&inst).unwrap(),
        ] {
            f.validate().unwrap();
            assert!((value_at(&f, &[1.0], &[0.5]) - 2.0).abs() < 1e-6, "{}", f.name);
        }
    }

    #[test]
    fn wrong_cases_rejected() {
        let h = UnivariateConvex::huber(1.0).unwrap();
        let inst = RankOneInstance::homogeneous(vec![1.0, -1.0], vec![0, 1], h).unwrap();
        assert!(build_conic_quadratic(&inst).is_err());
        assert!(build_rank1_nonneg_compact(&inst).is_err());
    }
}
