//! Exact optimum of a least-squares problem with indicators by enumerating
//! every indicator pattern allowed by the cardinality caps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of patterns [`mip_bruteforce`] will enumerate.
pub const PATTERN_LIMIT: u128 = 1_000_000;

/// `min ‖B y − d‖² + constant` where indicator `j` off forces the variables
/// in `switches[j]` to zero, subject to `Σ_{j ∈ group} z_j ≤ cap`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorLeastSquares {
    /// Residual rows over all continuous variables.
    pub b: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    pub constant: f64,
    pub switches: Vec<Vec<usize>>,
    /// Disjoint indicator groups with their caps.
    pub cards: Vec<(Vec<usize>, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    pub value: f64,
    /// Lexicographically smallest optimal pattern.
    pub pattern: Vec<u8>,
    /// Continuous optimum for that pattern.
    pub y: Vec<f64>,
    pub patterns: u64,
}

impl IndicatorLeastSquares {
    pub fn num_vars(&self) -> usize {
        self.b.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<()> {
        let p = self.num_vars();
        if self.b.len() != self.d.len() || self.b.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("residual rows are inconsistent".into()));
        }
        let m = self.switches.len();
        if self.switches.iter().flatten().any(|&v| v >= p) {
            return Err(Error::InvalidInstance("switched variable out of range".into()));
        }
        let mut seen = vec![false; m];
        for (g, _) in &self.cards {
            for &j in g {
                if j >= m || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::InvalidInstance("cardinality groups must be disjoint and in range".into()));
                }
            }
        }
        Ok(())
    }

    /// Number of patterns satisfying the caps.
    pub fn pattern_count(&self) -> u128 {
        let grouped: usize = self.cards.iter().map(|(g, _)| g.len()).sum();
        let free = self.switches.len() - grouped;
        let mut total: u128 = 1u128.checked_shl(free as u32).unwrap_or(u128::MAX);
        for (g, cap) in &self.cards {
            let mut sum = 0u128;
            let mut binom = 1u128;
            for a in 0..=(*cap).min(g.len()) {
                sum += binom;
                binom = binom * (g.len() - a) as u128 / (a + 1) as u128;
            }
            total = total.saturating_mul(sum);
        }
        total
    }

    /// Least-squares optimum with the given indicators on.
    pub fn solve_pattern(&self, pattern: &[u8]) -> (f64, Vec<f64>) {
        let p = self.num_vars();
        let mut active = vec![false; p];
        for (j, &on) in pattern.iter().enumerate() {
            if on == 1 {
                for &v in &self.switches[j] {
                    active[v] = true;
                }
            }
        }
        // variables not controlled by any indicator are always active
        let mut controlled = vec![false; p];
        for &v in self.switches.iter().flatten() {
            controlled[v] = true;
        }
        let cols: Vec<usize> = (0..p).filter(|&v| active[v] || !controlled[v]).collect();
        let d = DVector::from_vec(self.d.clone());
        let mut y = vec![0.0; p];
        if cols.is_empty() {
            return (d.norm_squared() + self.constant, y);
        }
        let m = DMatrix::from_fn(self.b.len(), cols.len(), |r, c| self.b[r][cols[c]]);
        let sol = m.clone().svd(true, true).solve(&d, 1e-13).expect("SVD with both factors");
        let resid = &m * &sol - &d;
        for (k, &v) in cols.iter().enumerate() {
            y[v] = sol[k];
        }
        (resid.norm_squared() + self.constant, y)
    }
}

/// Enumerates patterns in lexicographic order (0 before 1, first indicator
/// most significant) and keeps the first one attaining the minimum.
pub fn mip_bruteforce(problem: &IndicatorLeastSquares) -> Result<BruteForceResult> {
    problem.validate()?;
    let count = problem.pattern_count();
    if count > PATTERN_LIMIT {
        return Err(Error::SizeLimit { what: "indicator pattern", count, limit: PATTERN_LIMIT });
    }
    let m = problem.switches.len();
    let mut group_of = vec![None; m];
    for (k, (g, _)) in problem.cards.iter().enumerate() {
        for &j in g {
            group_of[j] = Some(k);
        }
    }
    let mut state = Enum {
        problem,
        group_of,
        load: vec![0; problem.cards.len()],
        pattern: vec![0; m],
        best: None,
        seen: 0,
    };
    state.walk(0);
    let (value, pattern, y) = state.best.expect("the all-off pattern is always feasible");
    Ok(BruteForceResult { value, pattern, y, patterns: state.seen })
}

struct Enum<'a> {
    problem: &'a IndicatorLeastSquares,
    group_of: Vec<Option<usize>>,
    load: Vec<usize>,
    pattern: Vec<u8>,
    best: Option<(f64, Vec<u8>, Vec<f64>)>,
    seen: u64,
}

impl Enum<'_> {
    fn walk(&mut self, j: usize) {
        if j == self.pattern.len() {
            self.seen += 1;
            let (v, y) = self.problem.solve_pattern(&self.pattern);
            let better = match &self.best {
                None => true,
                Some((b, _, _)) => v < b - 1e-12 * b.abs().max(1.0),
            };
            if better {
                self.best = Some((v, self.pattern.clone(), y));
            }
            return;
        }
        self.pattern[j] = 0;
        self.walk(j + 1);
        let room = match self.group_of[j] {
            Some(k) => self.load[k] < self.problem.cards[k].1,
            None => true,
        };
        if room {
            if let Some(k) = self.group_of[j] {
                self.load[k] += 1;
            }
            self.pattern[j] = 1;
            self.walk(j + 1);
            self.pattern[j] = 0;
            if let Some(k) = self.group_of[j] {
                self.load[k] -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min Σ (y_i − c_i)² with at most `k` nonzeros.
    fn best_subset(c: &[f64], k: usize) -> IndicatorLeastSquares {
        let n = c.len();
        IndicatorLeastSquares {
            b: (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect(),
            d: c.to_vec(),
            constant: 0.0,
            switches: (0..n).map(|i| vec![i]).collect(),
            cards: vec![((0..n).collect(), k)],
        }
    }

    #[test]
    fn keeps_largest_entries() {
        let r = mip_bruteforce(&best_subset(&[0.3, -2.0, 1.0, 0.1], 2)).unwrap();
        assert_eq!(r.pattern, vec![0, 1, 1, 0]);
        assert!((r.value - 0.1).abs() < 1e-12);
        assert_eq!(r.patterns, 11);
    }

    #[test]
    fn zero_data_prefers_all_off() {
        let r = mip_bruteforce(&best_subset(&[0.0; 5], 3)).unwrap();
        assert_eq!(r.pattern, vec![0; 5]);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn pattern_guard() {
        let p = best_subset(&[1.0; 40], 20);
        assert!(matches!(mip_bruteforce(&p), Err(Error::SizeLimit { .. })));
    }
}
