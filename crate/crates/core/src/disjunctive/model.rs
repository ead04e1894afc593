use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::convex::UnivariateConvex;
use crate::error::{Error, Result};

/// Index of a variable inside its formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    /// `None` means unbounded.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub kind: VarKind,
}

/// Affine expression `Σ coef·var + constant`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        LinExpr {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        LinExpr {
            terms: vec![(v, coef)],
            constant: 0.0,
        }
    }

    pub fn sum_of(vars: impl IntoIterator<Item = VarId>) -> Self {
        LinExpr {
            terms: vars.into_iter().map(|v| (v, 1.0)).collect(),
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, v: VarId, coef: f64) -> &mut Self {
        self.terms.push((v, coef));
        self
    }

    pub fn plus(mut self, v: VarId, coef: f64) -> Self {
        self.terms.push((v, coef));
        self
    }

    pub fn plus_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) {
        for &(v, c) in &other.terms {
            self.terms.push((v, c * scale));
        }
        self.constant += other.constant * scale;
    }

    pub fn scaled(&self, s: f64) -> LinExpr {
        LinExpr {
            terms: self.terms.iter().map(|&(v, c)| (v, c * s)).collect(),
            constant: self.constant * s,
        }
    }

    /// Merges repeated variables, drops zero coefficients and sorts by index.
    pub fn canonical(&self) -> LinExpr {
        let mut map: BTreeMap<VarId, f64> = BTreeMap::new();
        for &(v, c) in &self.terms {
            *map.entry(v).or_insert(0.0) += c;
        }
        LinExpr {
            terms: map.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    /// The single variable with coefficient one, if the expression is exactly that.
    pub fn as_single_var(&self) -> Option<VarId> {
        let c = self.canonical();
        match c.terms.as_slice() {
            [(v, coef)] if *coef == 1.0 && c.constant == 0.0 => Some(*v),
            _ => None,
        }
    }

    fn remap(&mut self, map: &[VarId]) {
        for t in &mut self.terms {
            t.0 = map[t.0 .0];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `expr sense rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub name: String,
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
}

/// The convex function inside a perspective row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ConeFunction {
    /// One input fed to a univariate function.
    Univariate { g: UnivariateConvex },
    /// `yᵀ Q y` for a positive semidefinite `Q` (row-major).
    QuadraticForm { q: Vec<Vec<f64>> },
}

impl ConeFunction {
    pub fn arity(&self) -> usize {
        match self {
            ConeFunction::Univariate { .. } => 1,
            ConeFunction::QuadraticForm { q } => q.len(),
        }
    }

    pub fn is_quadratic(&self) -> bool {
        match self {
            ConeFunction::Univariate { g } => {
                matches!(g, UnivariateConvex::Quadratic { .. })
                    || matches!(g, UnivariateConvex::PowerAbs { p } if *p == 2.0)
            }
            ConeFunction::QuadraticForm { .. } => true,
        }
    }

    /// Value at `y` (length `arity()`).
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            ConeFunction::Univariate { g } => g.eval(y[0]),
            ConeFunction::QuadraticForm { q } => {
                let mut v = 0.0;
                for (i, row) in q.iter().enumerate() {
                    for (j, &qij) in row.iter().enumerate() {
                        v += y[i] * qij * y[j];
                    }
                }
                v
            }
        }
    }

    /// Quadratic form matrix when the function is a homogeneous quadratic.
    pub fn quadratic_matrix(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            ConeFunction::Univariate { g } => match g {
                UnivariateConvex::Quadratic { coef } => Some(vec![vec![*coef]]),
                UnivariateConvex::PowerAbs { p } if *p == 2.0 => Some(vec![vec![1.0]]),
                _ => None,
            },
            ConeFunction::QuadraticForm { q } => Some(q.clone()),
        }
    }
}

/// `output ≥ m · f(inputs / m)` with `m = multiplier ≥ 0`, the recession
/// function of `f` when `m = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerspectiveRow {
    pub name: String,
    pub output: VarId,
    pub inputs: Vec<LinExpr>,
    pub multiplier: LinExpr,
    pub func: ConeFunction,
}

/// `lambda · u ≥ Σ exprs²` with `u, lambda ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatedRow {
    pub name: String,
    pub u: VarId,
    pub lambda: LinExpr,
    pub exprs: Vec<LinExpr>,
}

/// A lifted convex (or mixed-binary) model: minimize `objective + offset`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtendedFormulation {
    pub name: String,
    pub variables: Vec<Variable>,
    pub linear_rows: Vec<LinearRow>,
    pub perspective_rows: Vec<PerspectiveRow>,
    pub rotated_rows: Vec<RotatedRow>,
    pub objective: LinExpr,
    pub offset: f64,
    /// Named variable groups such as `x`, `z` and `t`.
    pub groups: BTreeMap<String, Vec<VarId>>,
    pub metadata: BTreeMap<String, String>,
}

impl ExtendedFormulation {
    pub fn new(name: impl Into<String>) -> Self {
        ExtendedFormulation {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: Option<f64>, upper: Option<f64>) -> VarId {
        self.push_var(Variable {
            name: name.into(),
            lower,
            upper,
            kind: VarKind::Continuous,
        })
    }

    pub fn free_var(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, None, None)
    }

    pub fn nonneg_var(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, Some(0.0), None)
    }

    pub fn binary_var(&mut self, name: impl Into<String>) -> VarId {
        self.push_var(Variable {
            name: name.into(),
            lower: Some(0.0),
            upper: Some(1.0),
            kind: VarKind::Binary,
        })
    }

    fn push_var(&mut self, v: Variable) -> VarId {
        self.variables.push(v);
        VarId(self.variables.len() - 1)
    }

    pub fn add_row(&mut self, name: impl Into<String>, expr: LinExpr, sense: Sense, rhs: f64) {
        self.linear_rows.push(LinearRow {
            name: name.into(),
            expr,
            sense,
            rhs,
        });
    }

    pub fn add_perspective(
        &mut self,
        name: impl Into<String>,
        output: VarId,
        inputs: Vec<LinExpr>,
        multiplier: LinExpr,
        func: ConeFunction,
    ) {
        self.perspective_rows.push(PerspectiveRow {
            name: name.into(),
            output,
            inputs,
            multiplier,
            func,
        });
    }

    pub fn add_rotated(&mut self, name: impl Into<String>, u: VarId, lambda: LinExpr, exprs: Vec<LinExpr>) {
        self.rotated_rows.push(RotatedRow {
            name: name.into(),
            u,
            lambda,
            exprs,
        });
    }

    pub fn group(&self, name: &str) -> &[VarId] {
        self.groups.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn set_group(&mut self, name: impl Into<String>, vars: Vec<VarId>) {
        self.groups.insert(name.into(), vars);
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn binaries(&self) -> Vec<VarId> {
        (0..self.variables.len())
            .filter(|&i| self.variables[i].kind == VarKind::Binary)
            .map(VarId)
            .collect()
    }

    /// Fixes a variable to a value by collapsing its bounds.
    pub fn fix(&mut self, v: VarId, value: f64) {
        self.variables[v.0].lower = Some(value);
        self.variables[v.0].upper = Some(value);
    }

    /// Copy with the variables of `group` fixed to `values`.
    pub fn with_fixed(&self, group: &str, values: &[f64]) -> Result<Self> {
        let vars = self.group(group).to_vec();
        if vars.len() != values.len() {
            return Err(Error::Dimension(format!(
                "group {group} has {} variables, got {} values",
                vars.len(),
                values.len()
            )));
        }
        let mut out = self.clone();
        for (v, &val) in vars.iter().zip(values) {
            out.fix(*v, val);
        }
        Ok(out)
    }

    /// Drops integrality markers.
    pub fn relaxed(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.variables {
            v.kind = VarKind::Continuous;
        }
        out
    }

    /// Objective value at a full assignment.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.eval(values) + self.offset
    }

    /// Copies every variable and row of `other` into `self`. Variables of
    /// `other` listed in `link` are identified with existing variables of
    /// `self`; the rest are renamed `prefix::name`. Returns the id map.
    pub fn embed(&mut self, other: &ExtendedFormulation, prefix: &str, link: &BTreeMap<VarId, VarId>) -> Vec<VarId> {
        let mut map = Vec::with_capacity(other.variables.len());
        for (i, v) in other.variables.iter().enumerate() {
            if let Some(&host) = link.get(&VarId(i)) {
                map.push(host);
            } else {
                let mut nv = v.clone();
                nv.name = format!("{prefix}::{}", v.name);
                map.push(self.push_var(nv));
            }
        }
        for r in &other.linear_rows {
            let mut r = r.clone();
            r.name = format!("{prefix}::{}", r.name);
            r.expr.remap(&map);
            self.linear_rows.push(r);
        }
        for p in &other.perspective_rows {
            let mut p = p.clone();
            p.name = format!("{prefix}::{}", p.name);
            p.output = map[p.output.0];
            for e in &mut p.inputs {
                e.remap(&map);
            }
            p.multiplier.remap(&map);
            self.perspective_rows.push(p);
        }
        for q in &other.rotated_rows {
            let mut q = q.clone();
            q.name = format!("{prefix}::{}", q.name);
            q.u = map[q.u.0];
            q.lambda.remap(&map);
            for e in &mut q.exprs {
                e.remap(&map);
            }
            self.rotated_rows.push(q);
        }
        map
    }

    /// Structural lint: every referenced variable exists, names are unique,
    /// perspective arities match, bounds are ordered.
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        let check_expr = |e: &LinExpr, what: &str| -> Result<()> {
            for &(v, c) in &e.terms {
                if v.0 >= n {
                    return Err(Error::InvalidInstance(format!("{what} references undeclared variable {}", v.0)));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidInstance(format!("{what} has non-finite coefficient")));
                }
            }
            if !e.constant.is_finite() {
                return Err(Error::InvalidInstance(format!("{what} has non-finite constant")));
            }
            Ok(())
        };
        let mut names = std::collections::BTreeSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidInstance(format!("duplicate variable name {}", v.name)));
            }
            if let (Some(l), Some(u)) = (v.lower, v.upper) {
                if l > u {
                    return Err(Error::InvalidInstance(format!("variable {} has lower {l} > upper {u}", v.name)));
                }
            }
        }
        for r in &self.linear_rows {
            check_expr(&r.expr, &r.name)?;
        }
        for p in &self.perspective_rows {
            if p.output.0 >= n {
                return Err(Error::InvalidInstance(format!("{} output undeclared", p.name)));
            }
            if p.inputs.len() != p.func.arity() {
                return Err(Error::InvalidInstance(format!(
                    "{} has {} inputs for a function of arity {}",
                    p.name,
                    p.inputs.len(),
                    p.func.arity()
                )));
            }
            for e in &p.inputs {
                check_expr(e, &p.name)?;
            }
            check_expr(&p.multiplier, &p.name)?;
        }
        for q in &self.rotated_rows {
            if q.u.0 >= n {
                return Err(Error::InvalidInstance(format!("{} u undeclared", q.name)));
            }
            check_expr(&q.lambda, &q.name)?;
            for e in &q.exprs {
                check_expr(e, &q.name)?;
            }
        }
        check_expr(&self.objective, "objective")?;
        for (g, vars) in &self.groups {
            if vars.iter().any(|v| v.0 >= n) {
                return Err(Error::InvalidInstance(format!("group {g} references undeclared variable")));
            }
        }
        Ok(())
    }

    /// Replaces quadratic perspective rows by rotated rows with an explicit
    /// factorization; other perspective rows are kept.
    pub fn lower_quadratic_perspectives(&self) -> Result<Self> {
        let mut out = self.clone();
        out.perspective_rows.clear();
        for p in &self.perspective_rows {
            match p.func.quadratic_matrix() {
                Some(q) => {
                    let l = psd_factor(&q)?;
                    let exprs = l
                        .iter()
                        .map(|row| {
                            let mut e = LinExpr::zero();
                            for (j, &c) in row.iter().enumerate() {
                                if c != 0.0 {
                                    e.add_expr(&p.inputs[j], c);
                                }
                            }
                            e.canonical()
                        })
                        .collect();
                    out.rotated_rows.push(RotatedRow {
                        name: p.name.clone(),
                        u: p.output,
                        lambda: p.multiplier.clone(),
                        exprs,
                    });
                }
                None => out.perspective_rows.push(p.clone()),
            }
        }
        Ok(out)
    }
}

/// Rows of `L` with `Q = Lᵀ L`; zero rows are dropped. Diagonal matrices are
/// factored exactly.
pub fn psd_factor(q: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = q.len();
    if q.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidFunction("quadratic form must be square".into()));
    }
    let diagonal = (0..k).all(|i| (0..k).all(|j| i == j || q[i][j] == 0.0));
    if diagonal {
        let mut rows = Vec::new();
        for i in 0..k {
            if q[i][i] < 0.0 {
                return Err(Error::InvalidFunction("quadratic form is not positive semidefinite".into()));
            }
            if q[i][i] > 0.0 {
                let mut r = vec![0.0; k];
                r[i] = q[i][i].sqrt();
                rows.push(r);
            }
        }
        return Ok(rows);
    }
    let m = nalgebra::DMatrix::from_fn(k, k, |i, j| 0.5 * (q[i][j] + q[j][i]));
    let eig = m.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let mut rows = Vec::new();
    for (idx, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev < -1e-10 * scale {
            return Err(Error::InvalidFunction("quadratic form is not positive semidefinite".into()));
        }
        if ev > 1e-14 * scale {
            let s = ev.sqrt();
            rows.push((0..k).map(|j| s * eig.eigenvectors[(j, idx)]).collect());
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_merges_terms() {
        let e = LinExpr::var(VarId(2)).plus(VarId(0), 1.0).plus(VarId(2), -1.0).plus_const(3.0);
        let c = e.canonical();
        assert_eq!(c.terms, vec![(VarId(0), 1.0)]);
        assert_eq!(c.constant, 3.0);
        assert_eq!(e.eval(&[2.0, 0.0, 5.0]), 5.0);
    }

    #[test]
    fn embed_links_and_prefixes() {
        let mut inner = ExtendedFormulation::new("inner");
        let a = inner.free_var("x");
        let b = inner.nonneg_var("t");
        inner.add_row("r", LinExpr::var(a).plus(b, 2.0), Sense::Le, 1.0);
        let mut host = ExtendedFormulation::new("host");
        let hx = host.free_var("x");
        let link = BTreeMap::from([(a, hx)]);
        let map = host.embed(&inner, "blk", &link);
        assert_eq!(map[0], hx);
        assert_eq!(host.variables[map[1].0].name, "blk::t");
        assert_eq!(host.linear_rows[0].name, "blk::r");
        assert_eq!(host.linear_rows[0].expr.terms, vec![(hx, 1.0), (map[1], 2.0)]);
        host.validate().unwrap();
    }

    #[test]
    fn validate_rejects_dangling_reference() {
        let mut f = ExtendedFormulation::new("bad");
        f.free_var("x");
        f.add_row("r", LinExpr::var(VarId(3)), Sense::Eq, 0.0);
        assert!(f.validate().is_err());
    }

    #[test]
    fn psd_factor_reconstructs() {
        let q = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let l = psd_factor(&q).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let v: f64 = l.iter().map(|r| r[i] * r[j]).sum();
                assert!((v - q[i][j]).abs() < 1e-12);
            }
        }
        assert_eq!(psd_factor(&[vec![4.0, 0.0], vec![0.0, 0.0]]).unwrap(), vec![vec![2.0, 0.0]]);
        assert!(psd_factor(&[vec![-1.0]]).is_err());
    }
}
