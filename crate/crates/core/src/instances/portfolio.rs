//! Portfolio problems with rank-one risk factors:
//! `min Σ_k t_k + Σ_i (d_i x_i)²` s.t. `t_k ≥ (a_kᵀx)²`, `Σx = 1`,
//! `cᵀx − hᵀz ≥ b`, `0 ≤ x ≤ z`, `z` binary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::convex::UnivariateConvex;
use crate::disjunctive::model::{ConeFunction, ExtendedFormulation, LinExpr, Sense, VarId};
use crate::disjunctive::rank1::build_conic_quadratic;
use crate::envelope::RankOneInstance;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioInstance {
    pub n: usize,
    /// One factor vector per rank-one term.
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub h: Vec<f64>,
    pub b: f64,
}

impl PortfolioInstance {
    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || self.c.len() != n || self.d.len() != n || self.h.len() != n || self.a.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("portfolio vectors must all have length n".into()));
        }
        if self.c.iter().chain(&self.d).chain(&self.h).any(|&v| !(v >= 0.0 && v.is_finite())) || !(self.b >= 0.0) {
            return Err(Error::InvalidInstance("c, d, h and b must be nonnegative".into()));
        }
        if self.a.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("factor loadings must be finite".into()));
        }
        Ok(())
    }
}

fn square() -> ConeFunction {
    ConeFunction::Univariate { g: UnivariateConvex::quadratic(1.0).expect("positive coefficient") }
}

struct Base {
    f: ExtendedFormulation,
    x: Vec<VarId>,
    z: Vec<VarId>,
    t: Vec<VarId>,
}

fn base(name: &str, inst: &PortfolioInstance) -> Result<Base> {
    inst.validate()?;
    let n = inst.n;
    let mut f = ExtendedFormulation::new(name);
    let x: Vec<VarId> = (1..=n).map(|i| f.nonneg_var(format!("x{i}"))).collect();
    let z: Vec<VarId> = (1..=n).map(|i| f.binary_var(format!("z{i}"))).collect();
    let t: Vec<VarId> = (1..=inst.k()).map(|k| f.free_var(format!("t{k}"))).collect();
    f.add_row("budget", LinExpr::sum_of(x.iter().copied()), Sense::Eq, 1.0);
    let mut ret = LinExpr::zero();
    for i in 0..n {
        ret.add_term(x[i], inst.c[i]);
        ret.add_term(z[i], -inst.h[i]);
        f.add_row(format!("on{}", i + 1), LinExpr::var(x[i]).plus(z[i], -1.0), Sense::Le, 0.0);
    }
    f.add_row("return", ret, Sense::Ge, inst.b);
    f.set_group("x", x.clone());
    f.set_group("z", z.clone());
    f.set_group("t", t.clone());
    Ok(Base { f, x, z, t })
}

/// Diagonal risk `p_i ≥ (d_i x_i)²/m_i` with the given multiplier per asset.
fn diagonal(b: &mut Base, inst: &PortfolioInstance, mult: impl Fn(usize) -> LinExpr) -> Vec<VarId> {
    let mut out = Vec::new();
    for i in 0..inst.n {
        let p = b.f.free_var(format!("p{}", i + 1));
        let e = LinExpr::term(b.x[i], inst.d[i]);
        b.f.add_perspective(format!("diag{}", i + 1), p, vec![e], mult(i), square());
        out.push(p);
    }
    out
}

fn finish(mut b: Base, p: Vec<VarId>) -> ExtendedFormulation {
    b.f.objective = LinExpr::sum_of(b.t.iter().copied().chain(p));
    b.f
}

/// Natural formulation: `t_k ≥ (a_kᵀx)²` and plain `(d_i x_i)²`.
pub fn build_portfolio_natural(inst: &PortfolioInstance) -> Result<ExtendedFormulation> {
    let mut b = base("portfolio-natural", inst)?;
    for k in 0..inst.k() {
        let mut e = LinExpr::zero();
        for i in 0..inst.n {
            if inst.a[k][i] != 0.0 {
                e.add_term(b.x[i], inst.a[k][i]);
            }
        }
        b.f.add_perspective(format!("risk{}", k + 1), b.t[k], vec![e], LinExpr::constant(1.0), square());
    }
    let p = diagonal(&mut b, inst, |_| LinExpr::constant(1.0));
    Ok(finish(b, p))
}

/// Perspective diagonal `(d_i x_i)²/z_i` and, per factor, the rotated-cone
/// hull block `t_k ≥ Σ a_ki² u_ki`, `λ_ki u_ki ≥ (x_i − τ_ki)²`,
/// `a_kᵀτ_k = 0`, `0 ≤ τ_k ≤ x`, `λ_k ≤ z`, `Σλ_k ≤ 1`.
pub fn build_portfolio_strengthened(inst: &PortfolioInstance) -> Result<ExtendedFormulation> {
    let mut b = base("portfolio-strengthened", inst)?;
    let z = b.z.clone();
    let p = diagonal(&mut b, inst, |i| LinExpr::var(z[i]));
    for k in 0..inst.k() {
        // assets with zero loading do not enter the factor
        let support: Vec<usize> = (0..inst.n).filter(|&i| inst.a[k][i] != 0.0).collect();
        if support.is_empty() {
            b.f.add_row(format!("risk{}", k + 1), LinExpr::var(b.t[k]), Sense::Ge, 0.0);
            continue;
        }
        let a: Vec<f64> = support.iter().map(|&i| inst.a[k][i]).collect();
        let plus: Vec<usize> = (0..support.len()).collect();
        let r1 = RankOneInstance::homogeneous(a, plus, UnivariateConvex::quadratic(1.0)?)?;
        let block = build_conic_quadratic(&r1)?;
        let mut link = BTreeMap::new();
        for (j, &i) in support.iter().enumerate() {
            link.insert(block.group("x")[j], b.x[i]);
            link.insert(block.group("z")[j], b.z[i]);
        }
        link.insert(block.group("t")[0], b.t[k]);
        b.f.embed(&block, &format!("factor{}", k + 1), &link);
    }
    Ok(finish(b, p))
}
