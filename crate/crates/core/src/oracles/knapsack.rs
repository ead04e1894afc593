//! Reduction of the 0-1 knapsack problem to a rank-one quadratic program with
//! bounded continuous variables and indicators, and its check by enumerating
//! both sides.
//!
//! With `M₁ = Σv + 1`, `M₂ = 2nW²M₁ + 1`, the program is
//! `min M₁(W x₀ + Σ w_i x_i − W)² − M₂ Σ_{i≥1} x_i + Σ_{i≥1} (M₂ − v_i) z_i`
//! subject to `0 ≤ x_i ≤ z_i`, `z ∈ {0,1}^{n+1}`.

use serde::{Deserialize, Serialize};

use crate::convex::UnivariateConvex;
use crate::disjunctive::model::{ConeFunction, ExtendedFormulation, LinExpr, Sense};
use crate::error::{Error, Result};

/// Largest `n` accepted by [`verify_reduction`].
pub const VERIFY_MAX_N: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackReduction {
    pub v: Vec<u64>,
    pub w: Vec<u64>,
    pub cap: u64,
    pub m1: u64,
    pub m2: u64,
}

/// Assembles the reduction; requires `w_i ≤ W ≤ Σw` and `W ≥ 1`.
pub fn knapsack_reduce(v: &[u64], w: &[u64], cap: u64) -> Result<KnapsackReduction> {
    let n = v.len();
    if n == 0 || w.len() != n {
        return Err(Error::InvalidInstance("v and w must be nonempty and of equal length".into()));
    }
    let wsum: u64 = w.iter().sum();
    if cap == 0 || w.iter().any(|&wi| wi > cap) || cap > wsum {
        return Err(Error::InvalidInstance(format!("need w_i ≤ W ≤ Σw and W ≥ 1, got W = {cap}")));
    }
    let m1 = v.iter().sum::<u64>() + 1;
    let m2 = 2 * n as u64 * cap * cap * m1 + 1;
    Ok(KnapsackReduction { v: v.to_vec(), w: w.to_vec(), cap, m1, m2 })
}

impl KnapsackReduction {
    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// Objective at `x = (x₀, …, x_n)` and `z = (z₁, …, z_n)`.
    pub fn objective(&self, x: &[f64], z: &[u8]) -> f64 {
        let (m1, m2, cap) = (self.m1 as f64, self.m2 as f64, self.cap as f64);
        let mut s = cap * x[0] - cap;
        let mut val = 0.0;
        for i in 0..self.n() {
            s += self.w[i] as f64 * x[i + 1];
            val += -m2 * x[i + 1] + (m2 - self.v[i] as f64) * z[i] as f64;
        }
        m1 * s * s + val
    }

    /// Exact minimum over `x` for fixed `z` (with `z₀` given separately).
    ///
    /// For a fixed total `s = W x₀ + Σ w_i x_i` the best `Σ x_i` is a
    /// fractional knapsack: fill the items by increasing weight, then `x₀`.
    /// That profile is concave and piecewise linear in `s`, so the objective
    /// is minimized exactly on each piece.
    pub fn inner_min(&self, z0: u8, z: &[u8]) -> (f64, Vec<f64>) {
        let n = self.n();
        let (m1, m2, cap) = (self.m1 as f64, self.m2 as f64, self.cap as f64);
        let mut order: Vec<usize> = (0..n).filter(|&i| z[i] == 1).collect();
        order.sort_by_key(|&i| (self.w[i], i));
        // segments (item or None for x0, length in s, gain per unit s)
        let mut base_count = 0.0;
        let mut segs: Vec<(Option<usize>, f64, f64)> = Vec::new();
        for &i in &order {
            if self.w[i] == 0 {
                base_count += 1.0;
            } else {
                segs.push((Some(i), self.w[i] as f64, 1.0 / self.w[i] as f64));
            }
        }
        if z0 == 1 {
            segs.push((None, cap, 0.0));
        }
        let fixed: f64 = (0..n).map(|i| (m2 - self.v[i] as f64) * z[i] as f64).sum();
        let q = |s: f64, count: f64| m1 * (s - cap) * (s - cap) - m2 * count;
        // start of the profile: s = 0
        let mut best_s = 0.0;
        let mut best_val = q(0.0, base_count);
        let (mut s0, mut c0) = (0.0, base_count);
        for &(_, len, gain) in &segs {
            let s_opt = (cap + m2 * gain / (2.0 * m1)).clamp(s0, s0 + len);
            let val = q(s_opt, c0 + gain * (s_opt - s0));
            if val < best_val {
                best_val = val;
                best_s = s_opt;
            }
            s0 += len;
            c0 += gain * len;
        }
        // recover x from the fill level
        let mut x = vec![0.0; n + 1];
        for &i in &order {
            if self.w[i] == 0 {
                x[i + 1] = 1.0;
            }
        }
        let mut left = best_s;
        for &(item, len, _) in &segs {
            let take = left.min(len);
            left -= take;
            match item {
                Some(i) => x[i + 1] = take / len,
                None => x[0] = take / len,
            }
        }
        (best_val + fixed, x)
    }

    /// The program as a formulation over `x0..xn`, `z0..zn`.
    pub fn to_formulation(&self) -> Result<ExtendedFormulation> {
        let n = self.n();
        let mut f = ExtendedFormulation::new("knapsack-reduction");
        let x: Vec<_> = (0..=n).map(|i| f.add_var(format!("x{i}"), Some(0.0), None)).collect();
        let z: Vec<_> = (0..=n).map(|i| f.binary_var(format!("z{i}"))).collect();
        let t = f.free_var("t");
        for i in 0..=n {
            f.add_row(format!("cap{i}"), LinExpr::var(x[i]).plus(z[i], -1.0), Sense::Le, 0.0);
        }
        let mut inner = LinExpr::term(x[0], self.cap as f64).plus_const(-(self.cap as f64));
        for i in 0..n {
            inner.add_term(x[i + 1], self.w[i] as f64);
        }
        let g = UnivariateConvex::quadratic(self.m1 as f64)?;
        f.add_perspective("balance", t, vec![inner], LinExpr::constant(1.0), ConeFunction::Univariate { g });
        let mut obj = LinExpr::var(t);
        for i in 0..n {
            obj.add_term(x[i + 1], -(self.m2 as f64));
            obj.add_term(z[i + 1], self.m2 as f64 - self.v[i] as f64);
        }
        f.objective = obj;
        f.set_group("x", x);
        f.set_group("z", z);
        f.set_group("t", vec![t]);
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    /// `max vᵀz` over `wᵀz ≤ W`.
    pub knapsack_value: u64,
    /// Optimal value of the reduced program.
    pub reduction_value: f64,
    pub knapsack_argmin: Vec<Vec<u8>>,
    /// Optimal `(z₁, …, z_n)` of the reduced program.
    pub reduction_argmin: Vec<Vec<u8>>,
    /// Largest `|x_i − z_i|` and `|x₀ − (1 − wᵀz/W)|` over the optimal patterns.
    pub forcing_error: f64,
    pub ok: bool,
    pub counterexample: Option<String>,
}

/// Enumerates `z` for both programs and compares optimal sets and values.
pub fn verify_reduction(red: &KnapsackReduction) -> Result<ReductionReport> {
    let n = red.n();
    if n > VERIFY_MAX_N {
        return Err(Error::Dimension(format!("verification supports n ≤ {VERIFY_MAX_N}, got {n}")));
    }
    let patterns = |mask: u32| -> Vec<u8> { (0..n).map(|i| ((mask >> i) & 1) as u8).collect() };

    let mut best_k = 0u64;
    let mut arg_k: Vec<Vec<u8>> = Vec::new();
    for mask in 0u32..(1 << n) {
        let z = patterns(mask);
        let weight: u64 = (0..n).map(|i| red.w[i] * z[i] as u64).sum();
        if weight > red.cap {
            continue;
        }
        let value: u64 = (0..n).map(|i| red.v[i] * z[i] as u64).sum();
        if value > best_k || arg_k.is_empty() {
            best_k = value;
            arg_k.clear();
        }
        if value == best_k {
            arg_k.push(z);
        }
    }

    let scale = (red.m2 as f64) * (n as f64 + 1.0);
    let tol = 1e-9 * scale.max(1.0);
    let mut sols: Vec<(f64, Vec<u8>, Vec<f64>)> = Vec::new();
    for mask in 0u32..(1 << n) {
        let z = patterns(mask);
        for z0 in [0u8, 1] {
            let (val, x) = red.inner_min(z0, &z);
            sols.push((val, z.clone(), x));
        }
    }
    let best_r = sols.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let mut arg_r: Vec<Vec<u8>> = Vec::new();
    let mut forcing_error: f64 = 0.0;
    for (val, z, x) in &sols {
        if *val <= best_r + tol {
            if !arg_r.contains(z) {
                arg_r.push(z.clone());
            }
            let wz: u64 = (0..n).map(|i| red.w[i] * z[i] as u64).sum();
            for i in 0..n {
                forcing_error = forcing_error.max((x[i + 1] - z[i] as f64).abs());
            }
            let x0 = 1.0 - wz as f64 / red.cap as f64;
            forcing_error = forcing_error.max((x[0] - x0).abs());
        }
    }
    arg_r.sort();
    arg_k.sort();
    let mut problems = Vec::new();
    if (best_r + best_k as f64).abs() > tol {
        problems.push(format!("reduced optimum {best_r} differs from −{best_k}"));
    }
    if arg_r != arg_k {
        problems.push(format!("optimal sets differ: knapsack {arg_k:?}, reduction {arg_r:?}"));
    }
    if forcing_error > 1e-8 {
        problems.push(format!("forcing violated by {forcing_error:e}"));
    }
    let counterexample = (!problems.is_empty()).then(|| format!("v={:?} w={:?} W={}: {}", red.v, red.w, red.cap, problems.join("; ")));
    Ok(ReductionReport {
        knapsack_value: best_k,
        reduction_value: best_r,
        knapsack_argmin: arg_k,
        reduction_argmin: arg_r,
        forcing_error,
        ok: counterexample.is_none(),
        counterexample,
    })
}

/// Outcome of checking every knapsack in a family.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExhaustiveReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

/// Value rules applied to every weight vector: a scrambled one and one that
/// ties values to weights, which produces many alternative optima.
fn value_rules(w: &[u64]) -> [Vec<u64>; 2] {
    [
        w.iter().enumerate().map(|(i, &wi)| 1 + (7 * i as u64 + 3 * wi) % 5).collect(),
        w.iter().map(|&wi| wi + 1).collect(),
    ]
}

/// Checks the reduction on all knapsacks with `n` items and weights in
/// `0..=wmax` (up to item order) whose capacity satisfies `w_i ≤ W ≤ Σw`,
/// `W ≥ 1`, under each value rule.
pub fn verify_exhaustive(n: usize, wmax: u64) -> Result<ExhaustiveReport> {
    let mut report = ExhaustiveReport::default();
    let mut w = vec![0u64; n];
    loop {
        let lo = w.iter().copied().max().unwrap_or(0).max(1);
        let hi: u64 = w.iter().sum();
        for cap in lo..=hi {
            for v in value_rules(&w) {
                let rep = verify_reduction(&knapsack_reduce(&v, &w, cap)?)?;
                report.checked += 1;
                if let Some(c) = rep.counterexample {
                    report.failures.push(c);
                }
            }
        }
        // next nondecreasing weight vector
        let Some(j) = (0..n).rev().find(|&j| w[j] < wmax) else { break };
        let next = w[j] + 1;
        for x in &mut w[j..] {
            *x = next;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_family() {
        let rep = verify_exhaustive(3, 3).unwrap();
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
        assert!(rep.checked > 20);
    }

    #[test]
    fn constants() {
        let r = knapsack_reduce(&[1, 2], &[1, 1], 1).unwrap();
        assert_eq!((r.m1, r.m2), (4, 17));
    }

    #[test]
    fn small_instance() {
        let r = knapsack_reduce(&[1, 2], &[1, 1], 1).unwrap();
        let rep = verify_reduction(&r).unwrap();
        assert!(rep.ok, "{:?}", rep.counterexample);
        assert_eq!(rep.knapsack_value, 2);
        assert!((rep.reduction_value + 2.0).abs() < 1e-9);
        assert_eq!(rep.reduction_argmin, vec![vec![0, 1]]);
    }

    #[test]
    fn everything_fits() {
        let r = knapsack_reduce(&[3, 1, 4], &[2, 1, 3], 6).unwrap();
        let rep = verify_reduction(&r).unwrap();
        assert!(rep.ok, "{:?}", rep.counterexample);
        assert_eq!(rep.knapsack_value, 8);
    }

    #[test]
    fn inner_min_matches_objective() {
        let r = knapsack_reduce(&[2, 3, 1], &[1, 2, 2], 3).unwrap();
        let (val, x) = r.inner_min(1, &[1, 1, 0]);
        assert!((val - r.objective(&x, &[1, 1, 0])).abs() < 1e-9);
        assert!((val + 5.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_premise() {
        assert!(knapsack_reduce(&[1], &[3], 2).is_err());
        assert!(knapsack_reduce(&[1, 1], &[1, 1], 3).is_err());
    }
}
