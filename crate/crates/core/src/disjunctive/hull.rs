//! Hull of `{(t, x, z) : t ≥ g(Ax) + cᵀx, x_i(1 − z_i) = 0, z binary}` for a
//! `k`-row matrix `A` from the pieces with at most `k` nonzeros plus, when
//! needed, the recession cone `{Ax = 0}`.

use serde::{Deserialize, Serialize};

use crate::convex::UnivariateConvex;
use crate::envelope::RankOneInstance;
use crate::error::{Error, Result};
use crate::solver::{solve_relaxation, SolveOptions, SolveStatus};

use super::model::{ConeFunction, ExtendedFormulation, LinExpr, Sense};
use super::union::{build_union_hull, subset_label, PieceBody, UnionPiece, UnionSpec};

/// Default cap on the number of pieces of a hull build.
pub const DEFAULT_PIECE_LIMIT: u128 = 100_000;

/// `f(x) = g(Ax) + cᵀx + offset` with `x_i ≥ 0` for `i ∈ iplus`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineConvexSpec {
    /// `k` rows of length `n`.
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub g: ConeFunction,
    pub iplus: Vec<usize>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceDescriptor {
    /// Variables outside the set are zero, indicators on the set are one.
    Subset(Vec<usize>),
    /// Directions with `Ax = 0` that respect the signs.
    Recession,
}

impl AffineConvexSpec {
    /// Checks dimensions and shifts a univariate `g` so that `g(0) = 0`, moving
    /// the constant into `offset`.
    pub fn new(a: Vec<Vec<f64>>, c: Vec<f64>, g: ConeFunction, iplus: Vec<usize>) -> Result<Self> {
        let (g, offset) = match g {
            ConeFunction::Univariate { g } => {
                g.validate()?;
                let g0 = g.eval(0.0);
                (ConeFunction::Univariate { g: g.center() }, g0)
            }
            other => (other, 0.0),
        };
        let mut iplus = iplus;
        iplus.sort_unstable();
        iplus.dedup();
        let spec = AffineConvexSpec { a, c, g, iplus, offset };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_rank_one(inst: &RankOneInstance) -> Self {
        AffineConvexSpec {
            a: vec![inst.a.clone()],
            c: inst.c.clone(),
            g: ConeFunction::Univariate { g: inst.g.clone() },
            iplus: inst.iplus.clone(),
            offset: inst.offset,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidInstance("n must be positive".into()));
        }
        if self.a.len() != self.g.arity() {
            return Err(Error::Dimension(format!("A has {} rows, g takes {} arguments", self.a.len(), self.g.arity())));
        }
        if self.a.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows of A differ in length from c".into()));
        }
        if self.a.iter().flatten().chain(&self.c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("A and c must be finite".into()));
        }
        if self.iplus.iter().any(|&i| i >= n) {
            return Err(Error::InvalidInstance("nonnegative index out of range".into()));
        }
        if let ConeFunction::QuadraticForm { q } = &self.g {
            super::model::psd_factor(q)?;
        }
        if self.g.eval(&vec![0.0; self.k()]) != 0.0 {
            return Err(Error::NotNormalized(self.g.eval(&vec![0.0; self.k()])));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn ax(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|r| r.iter().zip(x).map(|(a, x)| a * x).sum()).collect()
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        self.g.eval(&self.ax(x)) + self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.offset
    }
}

/// `Σ_{j ≤ k} C(n, j)`.
pub fn subset_piece_count(n: usize, k: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for j in 0..=k.min(n) {
        total += binom;
        binom = binom * (n - j) as u128 / (j + 1) as u128;
    }
    total
}

/// True when `{x ≠ 0 : Ax = 0, x_i ≥ 0 (i ∈ iplus)}` is nonempty.
pub fn recession_nontrivial(a: &[Vec<f64>], n: usize, iplus: &[usize]) -> Result<bool> {
    if a.len() == 1 {
        return Ok(recession_rank_one(&a[0], iplus));
    }
    if a.is_empty() {
        return Ok(n > 0);
    }
    if numeric_rank(a, n) == n {
        return Ok(false);
    }
    if iplus.is_empty() {
        return Ok(true);
    }
    let mut stacked: Vec<Vec<f64>> = a.to_vec();
    for &i in iplus {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        stacked.push(e);
    }
    if numeric_rank(&stacked, n) < n {
        return Ok(true);
    }
    // Every null direction moves some sign-constrained coordinate; look for
    // one moving them all nonnegatively.
    let mut lp = ExtendedFormulation::new("recession-test");
    let x: Vec<_> = (0..n)
        .map(|j| {
            let lower = iplus.contains(&j).then_some(0.0);
            lp.add_var(format!("x{}", j + 1), lower, None)
        })
        .collect();
    for (r, row) in a.iter().enumerate() {
        let mut e = LinExpr::zero();
        for j in 0..n {
            if row[j] != 0.0 {
                e.add_term(x[j], row[j]);
            }
        }
        lp.add_row(format!("null{}", r + 1), e, Sense::Eq, 0.0);
    }
    let mass = LinExpr::sum_of(iplus.iter().map(|&i| x[i]));
    lp.add_row("mass", mass.clone(), Sense::Le, 1.0);
    lp.objective = mass.scaled(-1.0);
    let r = solve_relaxation(&lp, &SolveOptions::default())?;
    match r.status {
        SolveStatus::Optimal | SolveStatus::Inexact => Ok(r.value < -0.5),
        _ => Err(Error::Solver(format!("recession test returned {:?}", r.status))),
    }
}

fn recession_rank_one(a: &[f64], iplus: &[usize]) -> bool {
    let n = a.len();
    if a.iter().any(|&v| v == 0.0) {
        return true;
    }
    if n < 2 {
        return false;
    }
    if iplus.len() < n {
        return true;
    }
    let pos = a.iter().any(|&v| v > 0.0);
    let neg = a.iter().any(|&v| v < 0.0);
    pos && neg
}

/// Rank with singular-value threshold `1e−10·‖A‖`.
fn numeric_rank(rows: &[Vec<f64>], n: usize) -> usize {
    let m = nalgebra::DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let top = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * top).count()
}

/// All subsets of size at most `k` (by size, then lexicographic) plus the
/// recession piece when the sign-restricted null space is nontrivial.
pub fn enumerate_pieces(spec: &AffineConvexSpec) -> Result<Vec<PieceDescriptor>> {
    enumerate_pieces_with_limit(spec, DEFAULT_PIECE_LIMIT)
}

pub fn enumerate_pieces_with_limit(spec: &AffineConvexSpec, limit: u128) -> Result<Vec<PieceDescriptor>> {
    spec.validate()?;
    let (n, k) = (spec.n(), spec.k());
    let count = subset_piece_count(n, k);
    if count > limit {
        return Err(Error::SizeLimit { what: "hull piece", count, limit });
    }
    let mut out = Vec::with_capacity(count as usize + 1);
    for size in 0..=k.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(PieceDescriptor::Subset(idx.clone()));
            // next combination in lexicographic order
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    if recession_nontrivial(&spec.a, n, &spec.iplus)? {
        out.push(PieceDescriptor::Recession);
    }
    Ok(out)
}

/// Hull formulation over the pieces of [`enumerate_pieces`]; minimizes
/// `t + cᵀx + offset`.
pub fn build_hull_formulation(spec: &AffineConvexSpec) -> Result<ExtendedFormulation> {
    build_hull_formulation_with_limit(spec, DEFAULT_PIECE_LIMIT)
}

pub fn build_hull_formulation_with_limit(spec: &AffineConvexSpec, limit: u128) -> Result<ExtendedFormulation> {
    let pieces = enumerate_pieces_with_limit(spec, limit)?;
    let n = spec.n();
    let union = UnionSpec {
        name: "hull".into(),
        var_names: (1..=n).map(|j| format!("x{j}")).collect(),
        indicator_names: (1..=n).map(|j| format!("z{j}")).collect(),
        nonneg: spec.iplus.clone(),
        pieces: pieces
            .iter()
            .map(|p| match p {
                PieceDescriptor::Subset(set) => UnionPiece {
                    name: subset_label(set),
                    support: set.clone(),
                    body: PieceBody::Function {
                        rows: spec.a.clone(),
                        func: spec.g.clone(),
                    },
                },
                PieceDescriptor::Recession => UnionPiece {
                    name: "R".into(),
                    support: (0..n).collect(),
                    body: PieceBody::Cone { equalities: spec.a.clone() },
                },
            })
            .collect(),
    };
    let mut f = build_union_hull(&union)?;
    let x = f.group("x").to_vec();
    for (j, &cj) in spec.c.iter().enumerate() {
        if cj != 0.0 {
            f.objective.add_term(x[j], cj);
        }
    }
    f.offset = spec.offset;
    f.metadata.insert("pieces".into(), pieces.len().to_string());
    Ok(f)
}

/// Convenience for a univariate `g` and a single row.
pub fn rank_one_spec(a: Vec<f64>, g: UnivariateConvex, iplus: Vec<usize>) -> Result<AffineConvexSpec> {
    let n = a.len();
    AffineConvexSpec::new(vec![a], vec![0.0; n], ConeFunction::Univariate { g }, iplus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> UnivariateConvex {
        UnivariateConvex::quadratic(1.0).unwrap()
    }

    #[test]
    fn piece_counts() {
        let spec = rank_one_spec(vec![1.0, 2.0, 3.0], q(), vec![0, 1, 2]).unwrap();
        let pieces = enumerate_pieces(&spec).unwrap();
        assert_eq!(pieces.len(), 4);
        assert!(!pieces.contains(&PieceDescriptor::Recession));

        let spec = rank_one_spec(vec![1.0, 2.0, 3.0], q(), vec![]).unwrap();
        assert_eq!(enumerate_pieces(&spec).unwrap().len(), 5);

        let qf = ConeFunction::QuadraticForm { q: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        let a = vec![vec![1.0, 0.0, 1.0, 2.0], vec![0.0, 1.0, -1.0, 1.0]];
        let spec = AffineConvexSpec::new(a, vec![0.0; 4], qf, vec![]).unwrap();
        let pieces = enumerate_pieces(&spec).unwrap();
        assert_eq!(pieces.len(), 12);
        assert_eq!(pieces.last(), Some(&PieceDescriptor::Recession));
        assert_eq!(subset_piece_count(4, 2), 11);
    }

    #[test]
    fn general_recession_test() {
        // null space spanned by (1, 1, -1): blocked by x3 ≥ 0 together with x1 ≥ 0
        let a = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]];
        assert!(!recession_nontrivial(&a, 3, &[0, 2]).unwrap());
        assert!(recession_nontrivial(&a, 3, &[0]).unwrap());
        assert!(recession_nontrivial(&a, 3, &[2]).unwrap());
        assert!(!recession_nontrivial(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2, &[]).unwrap());
    }

    #[test]
    fn size_limit() {
        let spec = rank_one_spec(vec![1.0; 30], q(), vec![]).unwrap();
        assert!(enumerate_pieces_with_limit(&spec, 10).is_err());
    }

    #[test]
    fn single_piece_value() {
        use crate::solver::solve_relaxation;
        let spec = rank_one_spec(vec![1.0], q(), vec![0]).unwrap();
        let f = build_hull_formulation(&spec).unwrap();
        let g = f.with_fixed("x", &[1.0]).unwrap().with_fixed("z", &[0.5]).unwrap();
        let r = solve_relaxation(&g, &SolveOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
    }
}
