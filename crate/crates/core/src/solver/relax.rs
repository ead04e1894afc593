//! Continuous relaxations solved by lowering every row to a cone and handing
//! the result to an interior-point conic solver.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::convex::UnivariateConvex;
use crate::disjunctive::model::{psd_factor, ConeFunction, ExtendedFormulation, LinExpr, Sense};
use crate::error::{Error, Result};

/// Accuracy and budget of a relaxation solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Target absolute and relative duality gap.
    pub tol: f64,
    /// Interior-point iteration budget.
    pub max_iter: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 400,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Converged to the requested gap.
    Optimal,
    /// Finished with reduced accuracy or out of budget; value is the best available.
    Inexact,
    Infeasible,
    Unbounded,
}

/// Evidence for the reported value.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Certificate {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: u32,
}

impl Certificate {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationResult {
    pub status: SolveStatus,
    /// Objective value including the offset; `+∞` when infeasible, `−∞` when unbounded.
    pub value: f64,
    /// Value of every formulation variable (empty unless a solution exists).
    pub point: Vec<f64>,
    pub certificate: Certificate,
}

impl RelaxationResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    fn infeasible() -> Self {
        RelaxationResult {
            status: SolveStatus::Infeasible,
            value: f64::INFINITY,
            point: Vec::new(),
            certificate: Certificate::default(),
        }
    }
}

const FEAS_TOL: f64 = 1e-9;

/// Affine function of solver columns.
#[derive(Clone, Debug, Default)]
struct Aff {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

impl Aff {
    fn col(j: usize) -> Self {
        Aff {
            terms: vec![(j, 1.0)],
            constant: 0.0,
        }
    }

    fn constant(c: f64) -> Self {
        Aff {
            terms: Vec::new(),
            constant: c,
        }
    }

    fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    fn scale(&self, s: f64) -> Aff {
        Aff {
            terms: self.terms.iter().map(|&(j, c)| (j, c * s)).collect(),
            constant: self.constant * s,
        }
    }

    fn add(&self, other: &Aff, s: f64) -> Aff {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().map(|&(j, c)| (j, c * s)));
        out.constant += other.constant * s;
        out
    }

    fn neg(&self) -> Aff {
        self.scale(-1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Cone {
    Soc,
    Exp,
    Pow(f64),
}

/// Conic program in column space: `min cᵀx` subject to affine blocks in cones.
struct ConicProgram {
    ncols: usize,
    zero: Vec<Aff>,
    nonneg: Vec<Aff>,
    blocks: Vec<(Cone, Vec<Aff>)>,
}

impl ConicProgram {
    fn new_col(&mut self) -> usize {
        self.ncols += 1;
        self.ncols - 1
    }

    fn soc(&mut self, entries: Vec<Aff>) {
        self.blocks.push((Cone::Soc, entries));
    }

    /// `o ≥ m · g(e/m)`, `m ≥ 0` handled by the caller.
    fn lower_univariate(&mut self, g: &UnivariateConvex, o: &Aff, m: &Aff, e: &Aff) {
        if m.is_constant() && m.constant == 0.0 {
            self.lower_recession(g, o, e);
            return;
        }
        match g {
            UnivariateConvex::Quadratic { coef } => {
                self.soc(vec![o.add(m, 1.0), o.add(m, -1.0), e.scale(2.0 * coef.sqrt())]);
            }
            UnivariateConvex::AbsoluteValue => self.abs_epigraph(o, e),
            UnivariateConvex::PowerAbs { p } if *p == 1.0 => self.abs_epigraph(o, e),
            UnivariateConvex::PowerAbs { p } if *p == 2.0 => {
                self.soc(vec![o.add(m, 1.0), o.add(m, -1.0), e.scale(2.0)]);
            }
            UnivariateConvex::PowerAbs { p } => {
                self.blocks.push((Cone::Pow(1.0 / p), vec![o.clone(), m.clone(), e.clone()]));
            }
            UnivariateConvex::Huber { delta } => {
                // m·huber(e/m) = min { p²/m + 2δ|q| : p + q = e }
                let p = Aff::col(self.new_col());
                let q = Aff::col(self.new_col());
                let u = Aff::col(self.new_col());
                let w = Aff::col(self.new_col());
                self.zero.push(e.add(&p, -1.0).add(&q, -1.0));
                self.soc(vec![u.add(m, 1.0), u.add(m, -1.0), p.scale(2.0)]);
                self.abs_epigraph(&w, &q);
                self.nonneg.push(o.add(&u, -1.0).add(&w, -2.0 * delta));
            }
            UnivariateConvex::Logistic => {
                // m·exp(−o/m) + m·exp((e−o)/m) ≤ m
                let u1 = Aff::col(self.new_col());
                let u2 = Aff::col(self.new_col());
                self.blocks.push((Cone::Exp, vec![o.neg(), m.clone(), u1.clone()]));
                self.blocks.push((Cone::Exp, vec![e.add(o, -1.0), m.clone(), u2.clone()]));
                self.nonneg.push(m.add(&u1, -1.0).add(&u2, -1.0));
            }
            UnivariateConvex::PiecewiseLinear {
                base_slope,
                breakpoints,
            } => {
                let mut rhs = e.scale(*base_slope);
                for b in breakpoints {
                    let w = Aff::col(self.new_col());
                    self.nonneg.push(w.clone());
                    self.nonneg.push(w.add(e, -1.0).add(m, b.point));
                    rhs = rhs.add(&w, b.slope_change);
                }
                self.nonneg.push(o.add(&rhs, -1.0));
            }
            UnivariateConvex::Shifted {
                inner,
                value_offset,
                slope_offset,
            } => {
                let oi = Aff::col(self.new_col());
                self.lower_univariate(inner, &oi, m, e);
                self.nonneg
                    .push(o.add(&oi, -1.0).add(m, -value_offset).add(e, -slope_offset));
            }
            UnivariateConvex::Sum { parts } => {
                let mut rest = o.clone();
                for part in parts {
                    let ok = Aff::col(self.new_col());
                    self.lower_univariate(part, &ok, m, e);
                    rest = rest.add(&ok, -1.0);
                }
                self.nonneg.push(rest);
            }
        }
    }

    /// `o ≥ rec_g(e)` from the asymptotic slopes.
    fn lower_recession(&mut self, g: &UnivariateConvex, o: &Aff, e: &Aff) {
        let (left, right) = g.asymptotic_slopes();
        match right {
            Some(r) => self.nonneg.push(o.add(e, -r)),
            None => self.nonneg.push(e.neg()),
        }
        match left {
            Some(l) => self.nonneg.push(o.add(e, -l)),
            None => self.nonneg.push(e.clone()),
        }
        if left.is_none() && right.is_none() {
            self.nonneg.push(o.clone());
        }
    }

    fn abs_epigraph(&mut self, o: &Aff, e: &Aff) {
        self.nonneg.push(o.add(e, -1.0));
        self.nonneg.push(o.add(e, 1.0));
    }
}

/// Outcome of bound propagation over fixed variables and singleton rows.
struct Presolved {
    lower: Vec<Option<f64>>,
    upper: Vec<Option<f64>>,
    fixed: Vec<Option<f64>>,
    consumed: Vec<bool>,
}

fn presolve(f: &ExtendedFormulation) -> Option<Presolved> {
    let n = f.variables.len();
    let mut lower: Vec<Option<f64>> = f.variables.iter().map(|v| v.lower).collect();
    let mut upper: Vec<Option<f64>> = f.variables.iter().map(|v| v.upper).collect();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    let mut consumed = vec![false; f.linear_rows.len()];

    let settle = |j: usize, lower: &[Option<f64>], upper: &[Option<f64>], fixed: &mut [Option<f64>]| -> bool {
        if let (Some(l), Some(u)) = (lower[j], upper[j]) {
            let tol = FEAS_TOL * (1.0 + l.abs().max(u.abs()));
            if l > u + tol {
                return false;
            }
            if u - l <= 1e-13 * (1.0 + l.abs()) || l >= u {
                fixed[j] = Some(if l >= u { 0.5 * (l + u) } else { l });
            }
        }
        true
    };
    for j in 0..n {
        if !settle(j, &lower, &upper, &mut fixed) {
            return None;
        }
    }
    loop {
        let mut changed = false;
        for (ri, row) in f.linear_rows.iter().enumerate() {
            if consumed[ri] {
                continue;
            }
            let expr = row.expr.canonical();
            let mut constant = expr.constant;
            let mut free = Vec::new();
            for &(v, c) in &expr.terms {
                match fixed[v.0] {
                    Some(val) => constant += c * val,
                    None => free.push((v.0, c)),
                }
            }
            let rhs = row.rhs - constant;
            match free.as_slice() {
                [] => {
                    let tol = FEAS_TOL * (1.0 + row.rhs.abs());
                    let ok = match row.sense {
                        Sense::Le => rhs >= -tol,
                        Sense::Ge => rhs <= tol,
                        Sense::Eq => rhs.abs() <= tol,
                    };
                    if !ok {
                        return None;
                    }
                    consumed[ri] = true;
                    changed = true;
                }
                [(j, c)] => {
                    let bound = rhs / c;
                    // c·x sense rhs
                    let (is_upper, is_lower) = match (row.sense, *c > 0.0) {
                        (Sense::Eq, _) => (true, true),
                        (Sense::Le, true) | (Sense::Ge, false) => (true, false),
                        (Sense::Le, false) | (Sense::Ge, true) => (false, true),
                    };
                    if is_upper {
                        upper[*j] = Some(upper[*j].map_or(bound, |u| u.min(bound)));
                    }
                    if is_lower {
                        lower[*j] = Some(lower[*j].map_or(bound, |l| l.max(bound)));
                    }
                    if row.sense == Sense::Eq {
                        lower[*j] = Some(bound.max(lower[*j].unwrap()));
                        upper[*j] = Some(bound.min(upper[*j].unwrap()));
                    }
                    if !settle(*j, &lower, &upper, &mut fixed) {
                        return None;
                    }
                    if row.sense == Sense::Eq && fixed[*j].is_none() {
                        fixed[*j] = Some(bound);
                    }
                    consumed[ri] = true;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    Some(Presolved {
        lower,
        upper,
        fixed,
        consumed,
    })
}

/// Solves the continuous relaxation of `f` (integrality markers are ignored).
pub fn solve_relaxation(f: &ExtendedFormulation, opts: &SolveOptions) -> Result<RelaxationResult> {
    f.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::Solver(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let Some(pre) = presolve(f) else {
        return Ok(RelaxationResult::infeasible());
    };
    let n = f.variables.len();
    let mut col_of = vec![usize::MAX; n];
    let mut ncols = 0;
    for j in 0..n {
        if pre.fixed[j].is_none() {
            col_of[j] = ncols;
            ncols += 1;
        }
    }
    let to_aff = |e: &LinExpr| -> Aff {
        let mut a = Aff::constant(e.constant);
        for &(v, c) in &e.terms {
            match pre.fixed[v.0] {
                Some(val) => a.constant += c * val,
                None => a.terms.push((col_of[v.0], c)),
            }
        }
        a
    };
    let mut prog = ConicProgram {
        ncols,
        zero: Vec::new(),
        nonneg: Vec::new(),
        blocks: Vec::new(),
    };
    for j in 0..n {
        if pre.fixed[j].is_some() {
            continue;
        }
        if let Some(l) = pre.lower[j] {
            prog.nonneg.push(Aff::col(col_of[j]).add(&Aff::constant(l), -1.0));
        }
        if let Some(u) = pre.upper[j] {
            prog.nonneg.push(Aff::constant(u).add(&Aff::col(col_of[j]), -1.0));
        }
    }
    for (ri, row) in f.linear_rows.iter().enumerate() {
        if pre.consumed[ri] {
            continue;
        }
        let a = to_aff(&row.expr).add(&Aff::constant(row.rhs), -1.0);
        match row.sense {
            Sense::Le => prog.nonneg.push(a.neg()),
            Sense::Ge => prog.nonneg.push(a),
            Sense::Eq => prog.zero.push(a),
        }
    }
    for p in &f.perspective_rows {
        let o = to_aff(&LinExpr::var(p.output));
        let m = to_aff(&p.multiplier);
        if !m.is_constant() {
            prog.nonneg.push(m.clone());
        } else if m.constant < -FEAS_TOL {
            return Ok(RelaxationResult::infeasible());
        }
        let m = if m.is_constant() && m.constant.abs() <= FEAS_TOL { Aff::constant(0.0) } else { m };
        let inputs: Vec<Aff> = p.inputs.iter().map(&to_aff).collect();
        match &p.func {
            ConeFunction::Univariate { g } => prog.lower_univariate(g, &o, &m, &inputs[0]),
            ConeFunction::QuadraticForm { q } => {
                let l = psd_factor(q)?;
                let le: Vec<Aff> = l
                    .iter()
                    .map(|row| {
                        let mut acc = Aff::constant(0.0);
                        for (k, &c) in row.iter().enumerate() {
                            acc = acc.add(&inputs[k], c);
                        }
                        acc
                    })
                    .collect();
                if m.is_constant() && m.constant == 0.0 {
                    prog.zero.extend(le);
                    prog.nonneg.push(o);
                } else {
                    let mut entries = vec![o.add(&m, 1.0), o.add(&m, -1.0)];
                    entries.extend(le.iter().map(|e| e.scale(2.0)));
                    prog.soc(entries);
                }
            }
        }
    }
    for r in &f.rotated_rows {
        let u = to_aff(&LinExpr::var(r.u));
        let lam = to_aff(&r.lambda);
        let exprs: Vec<Aff> = r.exprs.iter().map(&to_aff).collect();
        if lam.is_constant() && lam.constant.abs() <= FEAS_TOL {
            prog.zero.extend(exprs);
            prog.nonneg.push(u);
        } else {
            let mut entries = vec![u.add(&lam, 1.0), u.add(&lam, -1.0)];
            entries.extend(exprs.iter().map(|e| e.scale(2.0)));
            prog.soc(entries);
        }
    }

    let obj = to_aff(&f.objective);
    let constant = obj.constant + f.offset;
    let fill_point = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| pre.fixed[j].unwrap_or_else(|| x[col_of[j]]))
            .collect()
    };

    // Drop constant cone entries that hold; report infeasibility otherwise.
    let mut zero = Vec::new();
    for a in prog.zero.drain(..) {
        if a.is_constant() {
            if a.constant.abs() > FEAS_TOL * (1.0 + a.constant.abs()) {
                return Ok(RelaxationResult::infeasible());
            }
        } else {
            zero.push(a);
        }
    }
    let mut nonneg = Vec::new();
    for a in prog.nonneg.drain(..) {
        if a.is_constant() {
            if a.constant < -FEAS_TOL * (1.0 + a.constant.abs()) {
                return Ok(RelaxationResult::infeasible());
            }
        } else {
            nonneg.push(a);
        }
    }
    let mut blocks = Vec::new();
    for (cone, entries) in prog.blocks.drain(..) {
        if entries.iter().all(Aff::is_constant) {
            let v: Vec<f64> = entries.iter().map(|a| a.constant).collect();
            if !constant_in_cone(cone, &v) {
                return Ok(RelaxationResult::infeasible());
            }
        } else {
            blocks.push((cone, entries));
        }
    }

    let ncols = prog.ncols;
    if ncols == 0 {
        return Ok(RelaxationResult {
            status: SolveStatus::Optimal,
            value: constant,
            point: fill_point(&[]),
            certificate: Certificate {
                primal_objective: constant,
                dual_objective: constant,
                ..Default::default()
            },
        });
    }

    let mut q = vec![0.0; ncols];
    for &(j, c) in &obj.terms {
        q[j] += c;
    }
    let mut rows_i = Vec::new();
    let mut rows_j = Vec::new();
    let mut vals = Vec::new();
    let mut b = Vec::new();
    let mut cones = Vec::new();
    let push = |a: &Aff, rows_i: &mut Vec<usize>, rows_j: &mut Vec<usize>, vals: &mut Vec<f64>, b: &mut Vec<f64>| {
        let r = b.len();
        for &(j, c) in &a.terms {
            if c != 0.0 {
                rows_i.push(r);
                rows_j.push(j);
                vals.push(-c);
            }
        }
        b.push(a.constant);
    };
    if !zero.is_empty() {
        for a in &zero {
            push(a, &mut rows_i, &mut rows_j, &mut vals, &mut b);
        }
        cones.push(SupportedConeT::ZeroConeT(zero.len()));
    }
    if !nonneg.is_empty() {
        for a in &nonneg {
            push(a, &mut rows_i, &mut rows_j, &mut vals, &mut b);
        }
        cones.push(SupportedConeT::NonnegativeConeT(nonneg.len()));
    }
    for (cone, entries) in &blocks {
        for a in entries {
            push(a, &mut rows_i, &mut rows_j, &mut vals, &mut b);
        }
        cones.push(match cone {
            Cone::Soc => SupportedConeT::SecondOrderConeT(entries.len()),
            Cone::Exp => SupportedConeT::ExponentialConeT(),
            Cone::Pow(alpha) => SupportedConeT::PowerConeT(*alpha),
        });
    }
    let m = b.len();
    let a_mat = CscMatrix::new_from_triplets(m, ncols, rows_i, rows_j, vals);
    let p_mat = CscMatrix::<f64>::zeros((ncols, ncols));
    let tol = opts.tol.min(1e-8);
    let settings = DefaultSettings {
        verbose: false,
        max_iter: opts.max_iter,
        tol_gap_abs: tol,
        tol_gap_rel: tol,
        tol_feas: 1e-9,
        ..DefaultSettings::default()
    };
    let mut solver = DefaultSolver::new(&p_mat, &q, &a_mat, &b, &cones, settings)
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    let certificate = Certificate {
        primal_objective: sol.obj_val + constant,
        dual_objective: sol.obj_val_dual + constant,
        primal_residual: sol.r_prim,
        dual_residual: sol.r_dual,
        iterations: sol.iterations,
    };
    let result = match sol.status {
        SolverStatus::Solved => RelaxationResult {
            status: SolveStatus::Optimal,
            value: sol.obj_val + constant,
            point: fill_point(&sol.x),
            certificate,
        },
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => RelaxationResult {
            certificate,
            ..RelaxationResult::infeasible()
        },
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => RelaxationResult {
            status: SolveStatus::Unbounded,
            value: f64::NEG_INFINITY,
            point: Vec::new(),
            certificate,
        },
        _ => RelaxationResult {
            status: SolveStatus::Inexact,
            value: sol.obj_val + constant,
            point: fill_point(&sol.x),
            certificate,
        },
    };
    Ok(result)
}

fn constant_in_cone(cone: Cone, v: &[f64]) -> bool {
    let tol = FEAS_TOL * (1.0 + v.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    match cone {
        Cone::Soc => v[0] + tol >= v[1..].iter().map(|x| x * x).sum::<f64>().sqrt(),
        Cone::Exp => {
            let (x, y, z) = (v[0], v[1], v[2]);
            if y > 0.0 {
                y * (x / y).exp() <= z + tol
            } else {
                y >= -tol && x <= tol && z >= -tol
            }
        }
        Cone::Pow(alpha) => {
            let (x, y, z) = (v[0], v[1], v[2]);
            x >= -tol && y >= -tol && x.max(0.0).powf(alpha) * y.max(0.0).powf(1.0 - alpha) + tol >= z.abs()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{Breakpoint, UnivariateConvex};
    use crate::disjunctive::model::{ExtendedFormulation, LinExpr};

    /// min t subject to t ≥ λ·g(x/λ), 0 ≤ λ ≤ z, with x and z fixed.
    fn perspective_value(g: UnivariateConvex, x: f64, z: f64) -> f64 {
        let mut f = ExtendedFormulation::new("p");
        let xv = f.add_var("x", Some(x), Some(x));
        let zv = f.add_var("z", Some(z), Some(z));
        let lam = f.add_var("lambda", Some(0.0), None);
        let t = f.free_var("t");
        f.add_row("cap", LinExpr::var(lam).plus(zv, -1.0), Sense::Le, 0.0);
        f.add_perspective("persp", t, vec![LinExpr::var(xv)], LinExpr::var(lam), ConeFunction::Univariate { g });
        f.objective = LinExpr::var(t);
        let r = solve_relaxation(&f, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "{r:?}");
        r.value
    }

    #[test]
    fn single_perspective_epigraph() {
        let q = UnivariateConvex::quadratic(1.0).unwrap();
        assert!((perspective_value(q, 1.0, 0.5) - 2.0).abs() < 1e-7);
    }

    #[test]
    fn every_variant_matches_its_perspective() {
        let pwl = UnivariateConvex::piecewise_linear(
            -0.5,
            vec![
                Breakpoint { point: -1.0, slope_change: 0.5 },
                Breakpoint { point: 0.5, slope_change: 2.0 },
            ],
        )
        .unwrap();
        let cases = vec![
            UnivariateConvex::quadratic(2.0).unwrap(),
            UnivariateConvex::AbsoluteValue,
            UnivariateConvex::power_abs(1.5).unwrap(),
            UnivariateConvex::power_abs(3.0).unwrap(),
            UnivariateConvex::huber(0.7).unwrap(),
            UnivariateConvex::Logistic,
            pwl,
            UnivariateConvex::shifted(UnivariateConvex::Logistic, 0.3, -0.2),
            UnivariateConvex::sum(vec![UnivariateConvex::huber(1.0).unwrap(), UnivariateConvex::quadratic(0.5).unwrap()]).unwrap(),
        ];
        for g in cases {
            for &(x, z) in &[(0.8, 0.6), (-1.3, 0.25), (2.0, 1.0)] {
                // With g normalized the optimum sits at λ = z; otherwise take the
                // best multiplier along a fine scan.
                let mut best = f64::INFINITY;
                for k in 0..=20000 {
                    let lam = z * k as f64 / 20000.0;
                    best = best.min(g.perspective(x, lam).unwrap().to_f64());
                }
                let got = perspective_value(g.clone(), x, z);
                assert!((got - best).abs() < 1e-5 * (1.0 + best.abs()), "{g:?} x={x} z={z}: {got} vs {best}");
            }
        }
    }

    #[test]
    fn zero_multiplier_uses_recession() {
        let q = UnivariateConvex::quadratic(1.0).unwrap();
        let mut f = ExtendedFormulation::new("p");
        let xv = f.add_var("x", Some(1.0), Some(1.0));
        let t = f.free_var("t");
        f.add_perspective("persp", t, vec![LinExpr::var(xv)], LinExpr::zero(), ConeFunction::Univariate { g: q });
        f.objective = LinExpr::var(t);
        let r = solve_relaxation(&f, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);

        let h = UnivariateConvex::huber(1.0).unwrap();
        let mut f = ExtendedFormulation::new("p");
        let xv = f.add_var("x", Some(-3.0), Some(-3.0));
        let t = f.free_var("t");
        f.add_perspective("persp", t, vec![LinExpr::var(xv)], LinExpr::zero(), ConeFunction::Univariate { g: h });
        f.objective = LinExpr::var(t);
        let r = solve_relaxation(&f, &SolveOptions::default()).unwrap();
        assert!((r.value - 6.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_linear_rows_detected() {
        let mut f = ExtendedFormulation::new("p");
        let x = f.add_var("x", Some(0.0), Some(1.0));
        let y = f.add_var("y", Some(0.0), Some(1.0));
        f.add_row("sum", LinExpr::var(x).plus(y, 1.0), Sense::Ge, 3.0);
        f.objective = LinExpr::var(x);
        let r = solve_relaxation(&f, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert_eq!(r.value, f64::INFINITY);
    }

    #[test]
    fn quadratic_form_rows() {
        // min t s.t. t ≥ (y1² + 2 y2²)/λ, λ = 0.5, y = (1, 1)
        let mut f = ExtendedFormulation::new("qf");
        let y1 = f.add_var("y1", Some(1.0), Some(1.0));
        let y2 = f.add_var("y2", Some(1.0), Some(1.0));
        let lam = f.add_var("lambda", Some(0.0), Some(0.5));
        let t = f.free_var("t");
        f.add_perspective(
            "persp",
            t,
            vec![LinExpr::var(y1), LinExpr::var(y2)],
            LinExpr::var(lam),
            ConeFunction::QuadraticForm { q: vec![vec![1.0, 0.0], vec![0.0, 2.0]] },
        );
        f.objective = LinExpr::var(t);
        let r = solve_relaxation(&f, &SolveOptions::default()).unwrap();
        assert!((r.value - 6.0).abs() < 1e-7, "{r:?}");
    }
}
