//! Convex hull of a union of indicator pieces by disjunctive programming, with
//! the indicator copies eliminated.
//!
//! Every continuous variable `x_j` has one indicator `z_j`. A piece allows a
//! subset `S` of the variables to be nonzero, forces `z_j = 1` on `S` and
//! leaves the other indicators free. The hull is
//!
//! `t ≥ Σ t_p`, `t_p ≥ f_p^π(x^p, λ_p)`, `x = Σ x^p`,
//! `Σ_{p: j ∈ S_p} λ_p ≤ z_j ≤ 1`, `λ ≥ 0`, `Σ λ_p = 1`
//!
//! where a piece with empty support is eliminated and turns the simplex row
//! into `Σ λ_p ≤ 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::{ConeFunction, ExtendedFormulation, LinExpr, Sense, VarId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PieceBody {
    /// `t ≥ func(rows · x)`; `rows` are dense over all variables.
    Function { rows: Vec<Vec<f64>>, func: ConeFunction },
    /// `t ≥ 0` on the cone `{rows · x = 0}`; copies are not scaled by the multiplier.
    Cone { equalities: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionPiece {
    pub name: String,
    /// Variables allowed to be nonzero; their indicators are one on the piece.
    pub support: Vec<usize>,
    pub body: PieceBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionSpec {
    pub name: String,
    pub var_names: Vec<String>,
    pub indicator_names: Vec<String>,
    /// Variables that are nonnegative in every piece.
    pub nonneg: Vec<usize>,
    pub pieces: Vec<UnionPiece>,
}

impl UnionSpec {
    fn validate(&self) -> Result<()> {
        let n = self.var_names.len();
        if self.indicator_names.len() != n {
            return Err(Error::Dimension("one indicator per variable is required".into()));
        }
        if self.pieces.is_empty() {
            return Err(Error::InvalidInstance("a union needs at least one piece".into()));
        }
        for p in &self.pieces {
            if p.support.iter().any(|&j| j >= n) {
                return Err(Error::InvalidInstance(format!("piece {} has an out-of-range support index", p.name)));
            }
            let rows = match &p.body {
                PieceBody::Function { rows, func } => {
                    if rows.len() != func.arity() {
                        return Err(Error::Dimension(format!("piece {} has {} rows for arity {}", p.name, rows.len(), func.arity())));
                    }
                    rows
                }
                PieceBody::Cone { equalities } => equalities,
            };
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::Dimension(format!("piece {} has a row of the wrong length", p.name)));
            }
        }
        Ok(())
    }
}

/// Builds the eliminated hull formulation. Groups: `x`, `z`, `t`, `lambda`.
pub fn build_union_hull(spec: &UnionSpec) -> Result<ExtendedFormulation> {
    spec.validate()?;
    let n = spec.var_names.len();
    let mut f = ExtendedFormulation::new(spec.name.clone());
    let x: Vec<VarId> = (0..n)
        .map(|j| {
            let lower = spec.nonneg.contains(&j).then_some(0.0);
            f.add_var(spec.var_names[j].clone(), lower, None)
        })
        .collect();
    let z: Vec<VarId> = spec.indicator_names.iter().map(|s| f.binary_var(s.clone())).collect();
    let t = f.free_var("t");
    f.set_group("x", x.clone());
    f.set_group("z", z.clone());
    f.set_group("t", vec![t]);

    let mut copies: Vec<Vec<VarId>> = vec![Vec::new(); n];
    let mut indicator_mass: Vec<LinExpr> = vec![LinExpr::zero(); n];
    let mut simplex = LinExpr::zero();
    let mut epi = LinExpr::var(t);
    let mut has_empty = false;
    let mut lambdas = Vec::new();
    for p in &spec.pieces {
        if p.support.is_empty() {
            has_empty = true;
            continue;
        }
        let lam = f.nonneg_var(format!("{}::lambda", p.name));
        lambdas.push(lam);
        simplex.add_term(lam, 1.0);
        let mut local = vec![None; n];
        for &j in &p.support {
            let lower = spec.nonneg.contains(&j).then_some(0.0);
            let c = f.add_var(format!("{}::{}", p.name, spec.var_names[j]), lower, None);
            local[j] = Some(c);
            copies[j].push(c);
            indicator_mass[j].add_term(lam, 1.0);
        }
        let apply = |row: &[f64]| -> LinExpr {
            let mut e = LinExpr::zero();
            for (j, &coef) in row.iter().enumerate() {
                if coef != 0.0 {
                    if let Some(c) = local[j] {
                        e.add_term(c, coef);
                    }
                }
            }
            e
        };
        match &p.body {
            PieceBody::Function { rows, func } => {
                let tp = f.free_var(format!("{}::t", p.name));
                let inputs = rows.iter().map(|r| apply(r)).collect();
                f.add_perspective(format!("{}::epi", p.name), tp, inputs, LinExpr::var(lam), func.clone());
                epi.add_term(tp, -1.0);
            }
            PieceBody::Cone { equalities } => {
                for (k, r) in equalities.iter().enumerate() {
                    f.add_row(format!("{}::eq{}", p.name, k + 1), apply(r), Sense::Eq, 0.0);
                }
            }
        }
    }
    f.add_row("epi", epi, Sense::Ge, 0.0);
    for j in 0..n {
        let mut link = LinExpr::var(x[j]);
        for &c in &copies[j] {
            link.add_term(c, -1.0);
        }
        f.add_row(format!("link::{}", spec.var_names[j]), link, Sense::Eq, 0.0);
        let ind = indicator_mass[j].clone().plus(z[j], -1.0);
        f.add_row(format!("ind::{}", spec.indicator_names[j]), ind, Sense::Le, 0.0);
    }
    let sense = if has_empty { Sense::Le } else { Sense::Eq };
    f.add_row("simplex", simplex, sense, 1.0);
    f.set_group("lambda", lambdas);
    f.objective = LinExpr::var(t);
    Ok(f)
}

/// `V{1,3}`-style label of a one-based index set.
pub fn subset_label(set: &[usize]) -> String {
    let inner: Vec<String> = set.iter().map(|j| (j + 1).to_string()).collect();
    format!("V{{{}}}", inner.join(","))
}
