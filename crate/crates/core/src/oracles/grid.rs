//! Envelope values by direct search over the lifted `(λ, τ)` program
//!
//! `min Σ λ_i g(s_i/λ_i)` s.t. `Σ s_i = aᵀx`, `s_i = a_i(x_i − τ_i)`,
//! `0 ≤ τ_i ≤ x_i` on the nonnegative indices, `0 ≤ λ_i ≤ z_i`, `Σλ ≤ 1`.
//!
//! The multipliers are searched on a grid that is refined around the best
//! point until its step reaches `h`. For fixed multipliers the offsets are
//! optimized exactly through the one-dimensional Lagrangian dual of the
//! balance row. Only `g`, its subgradient and its recession function are used.

use crate::convex::{ExtReal, UnivariateConvex};
use crate::envelope::{EnvelopePoint, RankOneInstance};
use crate::error::{Error, Result};

/// Largest `n` accepted by the grid oracle.
pub const GRID_MAX_N: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct GridOracle {
    pub value: ExtReal,
    /// `h` times a finite-difference slope estimate at the best grid point.
    pub error_bound: f64,
    pub lambda: Vec<f64>,
}

/// Fixed-multiplier subproblem over the `s_i`.
struct Offsets<'a> {
    g: &'a UnivariateConvex,
    lo: Vec<f64>,
    hi: Vec<f64>,
    total: f64,
}

impl Offsets<'_> {
    /// `argmin_u g(u) − αu` by bisection on the subdifferential; `±∞` when the
    /// slope `α` is never reached.
    fn argmin_shifted(&self, alpha: f64) -> f64 {
        let g = self.g;
        let (lo0, hi0) = g.subgradient(0.0);
        if lo0 <= alpha && alpha <= hi0 {
            return 0.0;
        }
        let up = alpha > hi0;
        let mut far = 1.0;
        loop {
            let (lo, hi) = g.subgradient(if up { far } else { -far });
            if (up && hi >= alpha) || (!up && lo <= alpha) {
                break;
            }
            far *= 2.0;
            if far > 1e18 {
                return if up { f64::INFINITY } else { f64::NEG_INFINITY };
            }
        }
        let (mut a, mut b) = if up { (0.0, far) } else { (-far, 0.0) };
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let (lo, hi) = g.subgradient(m);
            if hi < alpha {
                a = m;
            } else if lo > alpha {
                b = m;
            } else {
                return m;
            }
        }
        0.5 * (a + b)
    }

    /// Cost of `s` units on a term with multiplier zero.
    fn recession_cost(&self, s: f64) -> f64 {
        match self.g.recession(s) {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// `min_{s ∈ box} λ g(s/λ) − α s` for one term.
    fn term_dual(&self, i: usize, lambda: f64, alpha: f64, u: f64) -> f64 {
        let (lo, hi) = (self.lo[i], self.hi[i]);
        if lambda > 0.0 {
            let s = (lambda * u).clamp(lo, hi);
            if !s.is_finite() {
                return f64::NEG_INFINITY;
            }
            return lambda * self.g.eval(s / lambda) - alpha * s;
        }
        // positively homogeneous cost: the minimum sits at 0 or at a box end
        let mut best: f64 = 0.0;
        for (end, dir) in [(hi, 1.0), (lo, -1.0)] {
            let unit = self.recession_cost(dir) - alpha * dir;
            if unit < 0.0 {
                if end.is_finite() {
                    best = best.min(end.abs() * unit);
                } else {
                    return f64::NEG_INFINITY;
                }
            }
        }
        best
    }

    fn dual(&self, lambda: &[f64], alpha: f64) -> f64 {
        let u = self.argmin_shifted(alpha);
        let mut d = alpha * self.total;
        for i in 0..lambda.len() {
            d += self.term_dual(i, lambda[i], alpha, u);
            if d == f64::NEG_INFINITY {
                break;
            }
        }
        d
    }

    /// Range of `Σ s_i` with finite cost.
    fn feasible(&self, lambda: &[f64]) -> bool {
        let (mut lo, mut hi) = (0.0, 0.0);
        for i in 0..lambda.len() {
            if lambda[i] > 0.0 {
                lo += self.lo[i];
                hi += self.hi[i];
            } else {
                if self.recession_cost(1.0).is_finite() {
                    hi += self.hi[i];
                }
                if self.recession_cost(-1.0).is_finite() {
                    lo += self.lo[i];
                }
            }
        }
        let slack = 1e-12 * self.total.abs().max(1.0);
        lo - slack <= self.total && self.total <= hi + slack
    }

    /// Optimal value for fixed multipliers (strong duality of the balance row).
    fn value(&self, lambda: &[f64]) -> f64 {
        if !self.feasible(lambda) {
            return f64::INFINITY;
        }
        let d = |a: f64| self.dual(lambda, a);
        // bracket the maximizer of the concave dual by doubling outwards
        let mut step = 1.0;
        let mut right = 0.0;
        let mut right_val = d(0.0);
        let start_val = right_val;
        for _ in 0..80 {
            let cand = right + step;
            let v = d(cand);
            if v < right_val {
                right = cand;
                break;
            }
            right = cand;
            right_val = v;
            step *= 2.0;
        }
        let mut step = 1.0;
        let mut left = 0.0;
        let mut left_val = start_val;
        for _ in 0..80 {
            let cand = left - step;
            let v = d(cand);
            if v < left_val {
                left = cand;
                break;
            }
            left = cand;
            left_val = v;
            step *= 2.0;
        }
        golden_max(d, left, right)
    }
}

/// Maximum of a concave function on `[a, b]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd).max(f(a)).max(f(b));
    for _ in 0..300 {
        if (b - a) <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// Feasible multiplier closest to `cand` in the search: clamped to `[0, z]`
/// and scaled onto `Σλ ≤ 1`.
fn project(cand: &mut [f64], z: &[f64]) {
    for (l, &zi) in cand.iter_mut().zip(z) {
        *l = l.clamp(0.0, zi);
    }
    let s: f64 = cand.iter().sum();
    if s > 1.0 {
        for l in cand.iter_mut() {
            *l /= s;
        }
    }
}

/// Grid-refinement oracle for the envelope at `p`; `n ≤ 3`.
pub fn envelope_oracle_grid(inst: &RankOneInstance, p: &EnvelopePoint, h: f64) -> Result<GridOracle> {
    inst.check_point(p)?;
    let n = inst.n();
    if n > GRID_MAX_N {
        return Err(Error::Dimension(format!("grid oracle supports n ≤ {GRID_MAX_N}, got {n}")));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidInstance(format!("grid step must be in (0, 1), got {h}")));
    }
    let affine = inst.affine_part(&p.x);
    if p.x.iter().all(|&v| v == 0.0) {
        return Ok(GridOracle { value: ExtReal::Finite(affine), error_bound: 0.0, lambda: vec![0.0; n] });
    }
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    for &i in &inst.iplus {
        let s = inst.a[i] * p.x[i];
        lo[i] = s.min(0.0);
        hi[i] = s.max(0.0);
    }
    let total: f64 = inst.a.iter().zip(&p.x).map(|(a, x)| a * x).sum();
    let inner = Offsets { g: &inst.g, lo, hi, total };

    let zmax = p.z.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut best: Vec<f64> = p.z.iter().map(|&zi| 0.5 * zi).collect();
    project(&mut best, &p.z);
    let mut best_val = inner.value(&best);
    if zmax > 0.0 {
        let mut step = zmax / 4.0;
        let span = 4i32;
        loop {
            let center = best.clone();
            let width = (2 * span + 1) as usize;
            let total_pts = width.pow(n as u32);
            for code in 0..total_pts {
                let mut cand = center.clone();
                let mut c = code;
                for l in cand.iter_mut() {
                    let k = (c % width) as i32 - span;
                    c /= width;
                    *l += k as f64 * step;
                }
                project(&mut cand, &p.z);
                let v = inner.value(&cand);
                if v < best_val {
                    best_val = v;
                    best = cand;
                }
            }
            if step <= h {
                break;
            }
            step = (step / 2.0).max(h);
        }
    }
    if best_val == f64::INFINITY {
        return Ok(GridOracle { value: ExtReal::PosInf, error_bound: 0.0, lambda: best });
    }
    // slope of the value along each multiplier at a fixed probe width
    let probe = 1e-2 * zmax.max(h);
    let mut slope: f64 = 0.0;
    for i in 0..n {
        for dir in [1.0, -1.0] {
            let mut cand = best.clone();
            cand[i] += dir * probe;
            project(&mut cand, &p.z);
            let moved = (cand[i] - best[i]).abs();
            if moved > 0.0 {
                let v = inner.value(&cand);
                if v.is_finite() {
                    slope = slope.max((v - best_val).abs() / moved);
                }
            }
        }
    }
    Ok(GridOracle { value: ExtReal::Finite(best_val + affine), error_bound: h * slope, lambda: best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> UnivariateConvex {
        UnivariateConvex::quadratic(1.0).unwrap()
    }

    #[test]
    fn free_case_value() {
        let inst = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![], q()).unwrap();
        let p = EnvelopePoint::new(vec![1.0, 1.0], vec![0.5, 0.25]).unwrap();
        let r = envelope_oracle_grid(&inst, &p, 1e-3).unwrap();
        assert!((r.value.to_f64() - 16.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn origin_and_integral_points() {
        let inst = RankOneInstance::homogeneous(vec![1.0, -2.0], vec![0], q()).unwrap();
        let p = EnvelopePoint::new(vec![0.0, 0.0], vec![0.3, 0.1]).unwrap();
        assert_eq!(envelope_oracle_grid(&inst, &p, 1e-3).unwrap().value, ExtReal::Finite(0.0));
        let p = EnvelopePoint::new(vec![1.0, 0.25], vec![1.0, 1.0]).unwrap();
        let r = envelope_oracle_grid(&inst, &p, 1e-3).unwrap();
        assert!((r.value.to_f64() - inst.f(&p.x)).abs() < 1e-3 + r.error_bound);
    }

    #[test]
    fn infeasible_point() {
        let inst = RankOneInstance::homogeneous(vec![1.0, 1.0], vec![0, 1], q()).unwrap();
        let p = EnvelopePoint::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(envelope_oracle_grid(&inst, &p, 1e-3).unwrap().value, ExtReal::PosInf);
    }

    #[test]
    fn size_guard() {
        let inst = RankOneInstance::homogeneous(vec![1.0; 4], vec![], q()).unwrap();
        let p = EnvelopePoint::new(vec![1.0; 4], vec![0.5; 4]).unwrap();
        assert!(envelope_oracle_grid(&inst, &p, 1e-3).is_err());
    }
}
