//! Best-first branch-and-bound over the binary variables of a formulation.
//!
//! Nodes fix binaries through their bounds and solve the continuous
//! relaxation. Branching picks the most fractional binary (lowest index on
//! ties). Incumbents come from integral relaxations and from a rounding
//! heuristic that repairs cardinality rows and re-solves the continuous part.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::disjunctive::model::{ExtendedFormulation, Sense, VarId};
use crate::error::{Error, Result};

use super::relax::{solve_relaxation, SolveOptions, SolveStatus};

/// Binary values within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct BnbOptions {
    /// Relative gap `(incumbent − bound)/max(1, |incumbent|)` at which to stop.
    pub rel_gap: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    pub relaxation: SolveOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            rel_gap: 1e-6,
            node_limit: 100_000,
            time_limit: None,
            relaxation: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Optimal,
    NodeLimit,
    TimeLimit,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BnbResult {
    /// Incumbent value; `+∞` without one.
    pub value: f64,
    /// Lower bound on the optimum.
    pub bound: f64,
    /// Root relaxation value.
    pub root_bound: f64,
    /// Full variable assignment of the incumbent.
    pub solution: Vec<f64>,
    /// Values of the binaries of the incumbent, in variable order.
    pub pattern: Vec<u8>,
    pub nodes: usize,
    pub termination: Termination,
}

impl BnbResult {
    /// `(incumbent − bound)/|incumbent|·100`, `None` when undefined.
    pub fn end_gap(&self) -> Option<f64> {
        if !self.value.is_finite() || self.value == 0.0 {
            return None;
        }
        Some((self.value - self.bound) / self.value.abs() * 100.0)
    }
}

struct Node {
    bound: f64,
    seq: usize,
    /// Per binary: `None` free, `Some(0|1)` fixed.
    fixed: Vec<Option<u8>>,
    /// Relaxation point of this node.
    point: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    // max-heap: smaller bound first, then earlier creation
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound).then(o.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    base: &'a ExtendedFormulation,
    bins: Vec<VarId>,
    /// Rows `Σ binaries ≤ k` with positive coefficients, as (binary positions, coefficients, rhs).
    cards: Vec<(Vec<usize>, Vec<f64>, f64)>,
    opts: &'a BnbOptions,
    value: f64,
    solution: Vec<f64>,
}

impl Search<'_> {
    fn with_fixings(&self, fixed: &[Option<u8>]) -> ExtendedFormulation {
        let mut f = self.base.relaxed();
        for (k, fx) in fixed.iter().enumerate() {
            if let Some(b) = fx {
                f.fix(self.bins[k], *b as f64);
            }
        }
        f
    }

    fn solve(&self, fixed: &[Option<u8>]) -> Result<Option<(f64, Vec<f64>)>> {
        let r = solve_relaxation(&self.with_fixings(fixed), &self.opts.relaxation)?;
        match r.status {
            SolveStatus::Infeasible => Ok(None),
            SolveStatus::Unbounded => Err(Error::Solver("relaxation is unbounded".into())),
            _ => Ok(Some((r.value, r.point))),
        }
    }

    fn offer(&mut self, value: f64, point: Vec<f64>) {
        if value < self.value {
            self.value = value;
            self.solution = point;
        }
    }

    fn prune_level(&self) -> f64 {
        self.value - self.opts.rel_gap * self.value.abs().max(1.0)
    }

    /// Rounds the binaries at `point` by 0.5, drops the smallest relaxation
    /// values from violated cardinality rows, and solves the continuous rest.
    fn round(&mut self, point: &[f64]) -> Result<()> {
        let vals: Vec<f64> = self.bins.iter().map(|v| point[v.0]).collect();
        let mut pattern: Vec<u8> = vals.iter().map(|&v| (v >= 0.5) as u8).collect();
        for (idx, coef, rhs) in &self.cards {
            let mut load: f64 = idx.iter().zip(coef).map(|(&k, &c)| c * pattern[k] as f64).sum();
            while load > rhs + 1e-9 {
                let drop = idx
                    .iter()
                    .zip(coef)
                    .filter(|(&k, _)| pattern[k] == 1)
                    .min_by(|a, b| vals[*a.0].total_cmp(&vals[*b.0]).then(b.0.cmp(a.0)));
                match drop {
                    Some((&k, &c)) => {
                        pattern[k] = 0;
                        load -= c;
                    }
                    None => break,
                }
            }
        }
        let fixed: Vec<Option<u8>> = pattern.into_iter().map(Some).collect();
        if let Some((v, p)) = self.solve(&fixed)? {
            self.offer(v, p);
        }
        Ok(())
    }
}

/// Runs best-first branch-and-bound on `f`.
pub fn branch_and_bound(f: &ExtendedFormulation, opts: &BnbOptions) -> Result<BnbResult> {
    f.validate()?;
    let start = Instant::now();
    let bins = f.binaries();
    let pos_of = |v: VarId| bins.iter().position(|&b| b == v);
    let cards = f
        .linear_rows
        .iter()
        .filter(|r| r.sense == Sense::Le && !r.expr.terms.is_empty())
        .filter_map(|r| {
            let mut idx = Vec::new();
            let mut coef = Vec::new();
            for &(v, c) in &r.expr.terms {
                idx.push(pos_of(v)?);
                if c <= 0.0 {
                    return None;
                }
                coef.push(c);
            }
            Some((idx, coef, r.rhs - r.expr.constant))
        })
        .collect();
    let mut s = Search { base: f, bins, cards, opts, value: f64::INFINITY, solution: Vec::new() };

    let root_fixed = vec![None; s.bins.len()];
    let Some((root_bound, root_point)) = s.solve(&root_fixed)? else {
        return Ok(BnbResult {
            value: f64::INFINITY,
            bound: f64::INFINITY,
            root_bound: f64::INFINITY,
            solution: Vec::new(),
            pattern: Vec::new(),
            nodes: 1,
            termination: Termination::Infeasible,
        });
    };
    s.round(&root_point)?;
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node { bound: root_bound, seq, fixed: root_fixed, point: root_point });
    let mut nodes = 1usize;
    let mut termination = Termination::Optimal;

    while let Some(node) = heap.pop() {
        if node.bound >= s.prune_level() {
            heap.clear();
            break;
        }
        // integral relaxation: the node is solved
        let frac = s
            .bins
            .iter()
            .enumerate()
            .filter(|(k, _)| node.fixed[*k].is_none())
            .map(|(k, v)| (k, (node.point[v.0] - 0.5).abs()))
            .filter(|&(_, d)| d < 0.5 - INTEGRALITY_TOL)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some((branch, _)) = frac else {
            s.offer(node.bound, node.point);
            continue;
        };
        if nodes >= opts.node_limit {
            heap.push(node);
            termination = Termination::NodeLimit;
            break;
        }
        if opts.time_limit.is_some_and(|t| start.elapsed() > t) {
            heap.push(node);
            termination = Termination::TimeLimit;
            break;
        }
        for b in [0u8, 1u8] {
            let mut fixed = node.fixed.clone();
            fixed[branch] = Some(b);
            nodes += 1;
            if let Some((v, p)) = s.solve(&fixed)? {
                // a child cannot be below its parent beyond solver noise
                let v = v.max(node.bound);
                if v < s.prune_level() {
                    s.round(&p)?;
                    seq += 1;
                    heap.push(Node { bound: v, seq, fixed, point: p });
                }
            }
        }
    }

    let bound = heap.peek().map_or(s.value, |n| n.bound.min(s.value));
    if !s.value.is_finite() && termination == Termination::Optimal {
        termination = Termination::Infeasible;
    }
    let pattern = if s.solution.is_empty() {
        Vec::new()
    } else {
        s.bins.iter().map(|v| (s.solution[v.0] >= 0.5) as u8).collect()
    };
    Ok(BnbResult { value: s.value, bound, root_bound, solution: s.solution, pattern, nodes, termination })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disjunctive::model::LinExpr;

    /// min Σ (x_i − c_i)² with |x_i| ≤ 10 z_i and Σz ≤ k, via epigraph rows.
    fn sparse_fit(c: &[f64], k: f64) -> ExtendedFormulation {
        use crate::convex::UnivariateConvex;
        use crate::disjunctive::model::ConeFunction;
        let mut f = ExtendedFormulation::new("fit");
        let mut obj = LinExpr::zero();
        let mut card = LinExpr::zero();
        for (i, &ci) in c.iter().enumerate() {
            let x = f.free_var(format!("x{i}"));
            let z = f.binary_var(format!("z{i}"));
            let t = f.free_var(format!("t{i}"));
            f.add_row(format!("up{i}"), LinExpr::var(x).plus(z, -10.0), Sense::Le, 0.0);
            f.add_row(format!("lo{i}"), LinExpr::var(x).plus(z, 10.0), Sense::Ge, 0.0);
            f.add_perspective(
                format!("sq{i}"),
                t,
                vec![LinExpr::var(x).plus_const(-ci)],
                LinExpr::constant(1.0),
                ConeFunction::Univariate { g: UnivariateConvex::quadratic(1.0).unwrap() },
            );
            obj.add_term(t, 1.0);
            card.add_term(z, 1.0);
        }
        f.add_row("card", card, Sense::Le, k);
        f.objective = obj;
        f
    }

    #[test]
    fn picks_largest_entries() {
        let f = sparse_fit(&[0.3, -2.0, 1.0, 0.1], 2.0);
        let r = branch_and_bound(&f, &BnbOptions::default()).unwrap();
        assert_eq!(r.termination, Termination::Optimal);
        assert!((r.value - 0.1).abs() < 1e-6, "{}", r.value);
        assert_eq!(r.pattern, vec![0, 1, 1, 0]);
        assert!(r.bound <= r.value + 1e-9);
    }

    #[test]
    fn zero_data_needs_one_node() {
        let f = sparse_fit(&[0.0, 0.0, 0.0], 1.0);
        let r = branch_and_bound(&f, &BnbOptions::default()).unwrap();
        assert_eq!(r.nodes, 1);
        assert!(r.value.abs() < 1e-7);
    }

    #[test]
    fn deterministic() {
        let f = sparse_fit(&[0.5, -0.7, 0.6, 0.2, -0.4], 2.0);
        let a = branch_and_bound(&f, &BnbOptions::default()).unwrap();
        let b = branch_and_bound(&f, &BnbOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
