//! Mixed-integer formulations of the denoising problem.
//!
//! All three share the variables `x1..xn`, `v1..vn` (free), `z1..zn`,
//! `w1..wn` (binary), the big-M rows `−Mz ≤ x ≤ Mz`, `−Mw ≤ v ≤ Mw`, and the
//! cardinality rows `Σz ≤ k1`, `Σw ≤ k2`.

use std::collections::BTreeMap;

use crate::convex::UnivariateConvex;
use crate::disjunctive::model::{ConeFunction, ExtendedFormulation, LinExpr, Sense, VarId};
use crate::disjunctive::q2::build_q2_hull;
use crate::error::Result;
use crate::oracles::IndicatorLeastSquares;

use super::denoising::DenoisingInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DenoisingFormulation {
    /// Big-M only.
    Basic,
    /// Perspective strengthening of every fitness and smoothness term.
    RankOne,
    /// Hull of each fitness term joined with its smoothness term.
    RankTwo,
}

impl DenoisingFormulation {
    pub fn name(self) -> &'static str {
        match self {
            DenoisingFormulation::Basic => "basic",
            DenoisingFormulation::RankOne => "rankone",
            DenoisingFormulation::RankTwo => "ranktwo",
        }
    }

    pub fn build(self, inst: &DenoisingInstance) -> Result<ExtendedFormulation> {
        match self {
            DenoisingFormulation::Basic => build_basic(inst),
            DenoisingFormulation::RankOne => build_rankone(inst),
            DenoisingFormulation::RankTwo => build_ranktwo(inst),
        }
    }
}

struct Vars {
    x: Vec<VarId>,
    v: Vec<VarId>,
    z: Vec<VarId>,
    w: Vec<VarId>,
}

fn square() -> ConeFunction {
    ConeFunction::Univariate { g: UnivariateConvex::quadratic(1.0).expect("positive coefficient") }
}

fn common(name: &str, inst: &DenoisingInstance) -> Result<(ExtendedFormulation, Vars)> {
    inst.validate()?;
    let n = inst.n;
    let mut f = ExtendedFormulation::new(name);
    let x: Vec<VarId> = (1..=n).map(|i| f.free_var(format!("x{i}"))).collect();
    let v: Vec<VarId> = (1..=n).map(|i| f.free_var(format!("v{i}"))).collect();
    let z: Vec<VarId> = (1..=n).map(|i| f.binary_var(format!("z{i}"))).collect();
    let w: Vec<VarId> = (1..=n).map(|i| f.binary_var(format!("w{i}"))).collect();
    let m = inst.big_m;
    for i in 0..n {
        let k = i + 1;
        f.add_row(format!("bigM_x_up{k}"), LinExpr::var(x[i]).plus(z[i], -m), Sense::Le, 0.0);
        f.add_row(format!("bigM_x_lo{k}"), LinExpr::var(x[i]).plus(z[i], m), Sense::Ge, 0.0);
        f.add_row(format!("bigM_v_up{k}"), LinExpr::var(v[i]).plus(w[i], -m), Sense::Le, 0.0);
        f.add_row(format!("bigM_v_lo{k}"), LinExpr::var(v[i]).plus(w[i], m), Sense::Ge, 0.0);
    }
    f.add_row("card_z", LinExpr::sum_of(z.iter().copied()), Sense::Le, inst.k1 as f64);
    f.add_row("card_w", LinExpr::sum_of(w.iter().copied()), Sense::Le, inst.k2 as f64);
    f.set_group("x", x.clone());
    f.set_group("v", v.clone());
    f.set_group("z", z.clone());
    f.set_group("w", w.clone());
    f.metadata.insert("bigM".into(), inst.big_m.to_string());
    f.metadata.insert("seed".into(), inst.seed.to_string());
    Ok((f, Vars { x, v, z, w }))
}

/// `x_i − Σ_j α^j x_{i−ℓ+j−1}` for zero-based `i ≥ ℓ`.
fn smooth_expr(inst: &DenoisingInstance, x: &[VarId], i: usize) -> LinExpr {
    let mut e = LinExpr::var(x[i]);
    for (j, a) in inst.kernel().into_iter().enumerate() {
        e.add_term(x[i - inst.ell + j], -a);
    }
    e
}

/// Objective `Σ t_i + Ω Σ s_i − 2 Σ c_i (x_i − v_i) + ‖c‖²`.
fn expanded_objective(f: &mut ExtendedFormulation, inst: &DenoisingInstance, vars: &Vars, t: &[VarId], s: &[VarId]) {
    let mut obj = LinExpr::sum_of(t.iter().copied());
    for &si in s {
        obj.add_term(si, inst.omega);
    }
    for i in 0..inst.n {
        if inst.c[i] != 0.0 {
            obj.add_term(vars.x[i], -2.0 * inst.c[i]);
            obj.add_term(vars.v[i], 2.0 * inst.c[i]);
        }
    }
    f.objective = obj;
    f.offset = inst.c.iter().map(|c| c * c).sum();
}

/// `t_i ≥ (x_i − v_i)²` and `t_i (z_i + w_i) ≥ (x_i − v_i)²`.
fn rank_one_fitness(f: &mut ExtendedFormulation, vars: &Vars, i: usize) -> VarId {
    let k = i + 1;
    let t = f.free_var(format!("t{k}"));
    let d = LinExpr::var(vars.x[i]).plus(vars.v[i], -1.0);
    f.add_perspective(format!("fit{k}"), t, vec![d.clone()], LinExpr::constant(1.0), square());
    let mult = LinExpr::var(vars.z[i]).plus(vars.w[i], 1.0);
    f.add_perspective(format!("fit_persp{k}"), t, vec![d], mult, square());
    t
}

/// Big-M formulation with `t_i ≥ (x_i − v_i − c_i)²` and `s_i ≥ (smoothness)²`.
pub fn build_basic(inst: &DenoisingInstance) -> Result<ExtendedFormulation> {
    let (mut f, vars) = common("basic", inst)?;
    let mut obj = LinExpr::zero();
    for i in 0..inst.n {
        let k = i + 1;
        let t = f.free_var(format!("t{k}"));
        let d = LinExpr::var(vars.x[i]).plus(vars.v[i], -1.0).plus_const(-inst.c[i]);
        f.add_perspective(format!("fit{k}"), t, vec![d], LinExpr::constant(1.0), square());
        obj.add_term(t, 1.0);
    }
    for i in inst.ell..inst.n {
        let k = i + 1;
        let s = f.free_var(format!("s{k}"));
        f.add_perspective(format!("smooth{k}"), s, vec![smooth_expr(inst, &vars.x, i)], LinExpr::constant(1.0), square());
        obj.add_term(s, inst.omega);
    }
    f.objective = obj;
    Ok(f)
}

/// Perspective strengthening: the smoothness term of `x_i` uses the window
/// indicator sum `Σ_{j=i−ℓ}^{i} z_j` as multiplier.
pub fn build_rankone(inst: &DenoisingInstance) -> Result<ExtendedFormulation> {
    let (mut f, vars) = common("rankone", inst)?;
    let t: Vec<VarId> = (0..inst.n).map(|i| rank_one_fitness(&mut f, &vars, i)).collect();
    let mut s = Vec::new();
    for i in inst.ell..inst.n {
        let k = i + 1;
        let si = f.free_var(format!("s{k}"));
        let e = smooth_expr(inst, &vars.x, i);
        f.add_perspective(format!("smooth{k}"), si, vec![e.clone()], LinExpr::constant(1.0), square());
        let window = LinExpr::sum_of((i - inst.ell..=i).map(|j| vars.z[j]));
        f.add_perspective(format!("smooth_persp{k}"), si, vec![e], window, square());
        s.push(si);
    }
    expanded_objective(&mut f, inst, &vars, &t, &s);
    Ok(f)
}

/// Rank-one fitness for the first `ℓ` terms; afterwards the fitness and
/// smoothness terms of `x_i` share one rank-two hull with `y = x_i`,
/// `v = v_i` and the window `x_{i−ℓ}, …, x_{i−1}` weighted by the kernel.
pub fn build_ranktwo(inst: &DenoisingInstance) -> Result<ExtendedFormulation> {
    let (mut f, vars) = common("ranktwo", inst)?;
    let mut t: Vec<VarId> = (0..inst.ell).map(|i| rank_one_fitness(&mut f, &vars, i)).collect();
    let q2 = build_q2_hull(inst.omega, &inst.kernel())?;
    let qx = q2.group("x").to_vec();
    let qz = q2.group("z").to_vec();
    let qt = q2.group("t")[0];
    for i in inst.ell..inst.n {
        let k = i + 1;
        let ti = f.free_var(format!("t{k}"));
        let mut link = BTreeMap::new();
        for j in 0..inst.ell {
            link.insert(qx[j], vars.x[i - inst.ell + j]);
            link.insert(qz[j], vars.z[i - inst.ell + j]);
        }
        link.insert(qx[inst.ell], vars.x[i]);
        link.insert(qx[inst.ell + 1], vars.v[i]);
        link.insert(qz[inst.ell], vars.z[i]);
        link.insert(qz[inst.ell + 1], vars.w[i]);
        link.insert(qt, ti);
        f.embed(&q2, &format!("hull{k}"), &link);
        t.push(ti);
    }
    expanded_objective(&mut f, inst, &vars, &t, &[]);
    Ok(f)
}

/// The same problem as an indicator least-squares program over `(x, v)`,
/// with indicators `z1..zn, w1..wn` in that order.
pub fn denoising_least_squares(inst: &DenoisingInstance) -> Result<IndicatorLeastSquares> {
    inst.validate()?;
    let n = inst.n;
    let mut b = Vec::new();
    let mut d = Vec::new();
    for i in 0..n {
        let mut row = vec![0.0; 2 * n];
        row[i] = 1.0;
        row[n + i] = -1.0;
        b.push(row);
        d.push(inst.c[i]);
    }
    let root = inst.omega.sqrt();
    let kernel = inst.kernel();
    for i in inst.ell..n {
        let mut row = vec![0.0; 2 * n];
        row[i] = root;
        for j in 0..inst.ell {
            row[i - inst.ell + j] -= root * kernel[j];
        }
        b.push(row);
        d.push(0.0);
    }
    Ok(IndicatorLeastSquares {
        b,
        d,
        constant: 0.0,
        switches: (0..2 * n).map(|j| vec![j]).collect(),
        cards: vec![((0..n).collect(), inst.k1), ((n..2 * n).collect(), inst.k2)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::denoising::{generate_denoising, DenoisingOverrides};
    use crate::solver::{solve_relaxation, SolveOptions};

    fn tiny() -> DenoisingInstance {
        let over = DenoisingOverrides { spikes: Some(1), k1: Some(2), k2: Some(1), ..Default::default() };
        generate_denoising(8, 2, 0.05, 4, over).unwrap()
    }

    #[test]
    fn builds_validate() {
        let inst = tiny();
        for kind in [DenoisingFormulation::Basic, DenoisingFormulation::RankOne, DenoisingFormulation::RankTwo] {
            let f = kind.build(&inst).unwrap();
            f.validate().unwrap();
            assert_eq!(f.binaries().len(), 2 * inst.n, "{}", kind.name());
        }
    }

    #[test]
    fn basic_relaxation_is_trivial() {
        let f = build_basic(&tiny()).unwrap();
        let r = solve_relaxation(&f.relaxed(), &SolveOptions::default()).unwrap();
        assert!(r.value.abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn patterns_agree_across_formulations() {
        let inst = tiny();
        let ls = denoising_least_squares(&inst).unwrap();
        let mut pattern = vec![0u8; 2 * inst.n];
        pattern[2] = 1;
        pattern[3] = 1;
        pattern[inst.n + 5] = 1;
        let (exact, _) = ls.solve_pattern(&pattern);
        for kind in [DenoisingFormulation::Basic, DenoisingFormulation::RankOne, DenoisingFormulation::RankTwo] {
            let mut f = kind.build(&inst).unwrap();
            for (b, &p) in f.binaries().into_iter().zip(&pattern) {
                f.fix(b, p as f64);
            }
            let r = solve_relaxation(&f, &SolveOptions::default()).unwrap();
            assert!((r.value - exact).abs() < 1e-6, "{}: {} vs {}", kind.name(), r.value, exact);
        }
    }
}
