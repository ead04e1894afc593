use serde::{Deserialize, Serialize};

use super::extreal::ExtReal;
use crate::error::{Error, Result};

/// Width above which a subdifferential is treated as a genuine kink.
pub const DIFF_TOL: f64 = 1e-12;

/// Relative tolerance of the monotone inverses.
pub const INVERSE_TOL: f64 = 1e-10;

/// One kink of a piecewise-linear function: the slope increases by
/// `slope_change` when crossing `point` from the left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub point: f64,
    pub slope_change: f64,
}

/// A finite convex function of one real variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum UnivariateConvex {
    /// `coef · s²`
    Quadratic { coef: f64 },
    /// `|s|`
    AbsoluteValue,
    /// `|s|^p`
    PowerAbs { p: f64 },
    /// `s²` on `|s| ≤ delta`, `delta · (2|s| − delta)` outside.
    Huber { delta: f64 },
    /// `ln(1 + e^s)`, stored unnormalized.
    Logistic,
    /// `base_slope · s + Σ slope_change_j · max(0, s − point_j)`
    PiecewiseLinear {
        base_slope: f64,
        breakpoints: Vec<Breakpoint>,
    },
    /// `inner(s) + value_offset + slope_offset · s`
    Shifted {
        inner: Box<UnivariateConvex>,
        value_offset: f64,
        slope_offset: f64,
    },
    /// Pointwise sum of the parts.
    Sum { parts: Vec<UnivariateConvex> },
}

/// Choice of the slope removed by [`UnivariateConvex::normalize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    /// Midpoint of the subdifferential at zero.
    Auto,
    Given(f64),
}

fn finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidFunction(format!("{what} must be finite, got {x}")))
    }
}

/// `ln(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

impl UnivariateConvex {
    pub fn quadratic(coef: f64) -> Result<Self> {
        let g = UnivariateConvex::Quadratic { coef };
        g.validate()?;
        Ok(g)
    }

    pub fn power_abs(p: f64) -> Result<Self> {
        let g = UnivariateConvex::PowerAbs { p };
        g.validate()?;
        Ok(g)
    }

    pub fn huber(delta: f64) -> Result<Self> {
        let g = UnivariateConvex::Huber { delta };
        g.validate()?;
        Ok(g)
    }

    /// Piecewise-linear function; breakpoints are sorted by position.
    pub fn piecewise_linear(base_slope: f64, mut breakpoints: Vec<Breakpoint>) -> Result<Self> {
        breakpoints.sort_by(|a, b| a.point.total_cmp(&b.point));
        let g = UnivariateConvex::PiecewiseLinear {
            base_slope,
            breakpoints,
        };
        g.validate()?;
        Ok(g)
    }

    /// `inner(s) + value_offset + slope_offset · s`, flattening nested shifts.
    pub fn shifted(inner: UnivariateConvex, value_offset: f64, slope_offset: f64) -> Self {
        match inner {
            UnivariateConvex::Shifted {
                inner,
                value_offset: v,
                slope_offset: c,
            } => UnivariateConvex::shifted(*inner, v + value_offset, c + slope_offset),
            other if value_offset == 0.0 && slope_offset == 0.0 => other,
            other => UnivariateConvex::Shifted {
                inner: Box::new(other),
                value_offset,
                slope_offset,
            },
        }
    }

    pub fn sum(parts: Vec<UnivariateConvex>) -> Result<Self> {
        let g = UnivariateConvex::Sum { parts };
        g.validate()?;
        Ok(g)
    }

    /// Checks parameter ranges; deserialized values should be validated before use.
    pub fn validate(&self) -> Result<()> {
        use UnivariateConvex::*;
        match self {
            Quadratic { coef } => {
                finite(*coef, "quadratic coefficient")?;
                if *coef <= 0.0 {
                    return Err(Error::InvalidFunction(format!(
                        "quadratic coefficient must be positive, got {coef}"
                    )));
                }
            }
            AbsoluteValue | Logistic => {}
            PowerAbs { p } => {
                finite(*p, "power")?;
                if *p < 1.0 {
                    return Err(Error::InvalidFunction(format!("power must be at least 1, got {p}")));
                }
            }
            Huber { delta } => {
                finite(*delta, "huber threshold")?;
                if *delta <= 0.0 {
                    return Err(Error::InvalidFunction(format!(
                        "huber threshold must be positive, got {delta}"
                    )));
                }
            }
            PiecewiseLinear {
                base_slope,
                breakpoints,
            } => {
                finite(*base_slope, "base slope")?;
                for (k, b) in breakpoints.iter().enumerate() {
                    finite(b.point, "breakpoint")?;
                    finite(b.slope_change, "slope change")?;
                    if b.slope_change < 0.0 {
                        return Err(Error::InvalidFunction(format!(
                            "slope change at {} is negative ({})",
                            b.point, b.slope_change
                        )));
                    }
                    if k > 0 && breakpoints[k - 1].point > b.point {
                        return Err(Error::InvalidFunction("breakpoints must be sorted".into()));
                    }
                }
            }
            Shifted {
                inner,
                value_offset,
                slope_offset,
            } => {
                finite(*value_offset, "value offset")?;
                finite(*slope_offset, "slope offset")?;
                inner.validate()?;
            }
            Sum { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidFunction("sum needs at least one part".into()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> f64 {
        use UnivariateConvex::*;
        match self {
            Quadratic { coef } => coef * s * s,
            AbsoluteValue => s.abs(),
            PowerAbs { p } => {
                if *p == 1.0 {
                    s.abs()
                } else if *p == 2.0 {
                    s * s
                } else {
                    s.abs().powf(*p)
                }
            }
            Huber { delta } => {
                let a = s.abs();
                if a <= *delta {
                    s * s
                } else {
                    delta * (2.0 * a - delta)
                }
            }
            Logistic => softplus(s),
            PiecewiseLinear {
                base_slope,
                breakpoints,
            } => {
                base_slope * s
                    + breakpoints
                        .iter()
                        .map(|b| b.slope_change * (s - b.point).max(0.0))
                        .sum::<f64>()
            }
            Shifted {
                inner,
                value_offset,
                slope_offset,
            } => inner.eval(s) + value_offset + slope_offset * s,
            Sum { parts } => parts.iter().map(|p| p.eval(s)).sum(),
        }
    }

    /// The subdifferential `[g′₋(s), g′₊(s)]`.
    pub fn subgradient(&self, s: f64) -> (f64, f64) {
        use UnivariateConvex::*;
        match self {
            Quadratic { coef } => {
                let d = 2.0 * coef * s;
                (d, d)
            }
            AbsoluteValue => abs_subgradient(s),
            PowerAbs { p } => {
                if *p == 1.0 {
                    abs_subgradient(s)
                } else {
                    let d = p * s.abs().powf(p - 1.0) * s.signum();
                    let d = if s == 0.0 { 0.0 } else { d };
                    (d, d)
                }
            }
            Huber { delta } => {
                let d = if s.abs() <= *delta {
                    2.0 * s
                } else {
                    2.0 * delta * s.signum()
                };
                (d, d)
            }
            Logistic => {
                let d = sigmoid(s);
                (d, d)
            }
            PiecewiseLinear {
                base_slope,
                breakpoints,
            } => {
                let mut lo = *base_slope;
                let mut hi = *base_slope;
                for b in breakpoints {
                    if b.point < s {
                        lo += b.slope_change;
                    }
                    if b.point <= s {
                        hi += b.slope_change;
                    }
                }
                (lo, hi)
            }
            Shifted {
                inner,
                slope_offset,
                ..
            } => {
                let (lo, hi) = inner.subgradient(s);
                (lo + slope_offset, hi + slope_offset)
            }
            Sum { parts } => parts.iter().fold((0.0, 0.0), |(lo, hi), p| {
                let (a, b) = p.subgradient(s);
                (lo + a, hi + b)
            }),
        }
    }

    /// `g′(s)`, rejecting kinks wider than [`DIFF_TOL`].
    pub fn derivative(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.subgradient(s);
        if hi - lo > DIFF_TOL {
            return Err(Error::NotDifferentiable { at: s, width: hi - lo });
        }
        Ok(0.5 * (lo + hi))
    }

    /// Limits of the slope as `s → −∞` and `s → +∞`; `None` means unbounded.
    pub fn asymptotic_slopes(&self) -> (Option<f64>, Option<f64>) {
        use UnivariateConvex::*;
        match self {
            Quadratic { .. } => (None, None),
            AbsoluteValue => (Some(-1.0), Some(1.0)),
            PowerAbs { p } => {
                if *p == 1.0 {
                    (Some(-1.0), Some(1.0))
                } else {
                    (None, None)
                }
            }
            Huber { delta } => (Some(-2.0 * delta), Some(2.0 * delta)),
            Logistic => (Some(0.0), Some(1.0)),
            PiecewiseLinear {
                base_slope,
                breakpoints,
            } => (
                Some(*base_slope),
                Some(base_slope + breakpoints.iter().map(|b| b.slope_change).sum::<f64>()),
            ),
            Shifted {
                inner,
                slope_offset,
                ..
            } => {
                let (l, r) = inner.asymptotic_slopes();
                (l.map(|v| v + slope_offset), r.map(|v| v + slope_offset))
            }
            Sum { parts } => {
                let mut l = Some(0.0);
                let mut r = Some(0.0);
                for p in parts {
                    let (a, b) = p.asymptotic_slopes();
                    l = l.zip(a).map(|(x, y)| x + y);
                    r = r.zip(b).map(|(x, y)| x + y);
                }
                (l, r)
            }
        }
    }

    /// `lim_{λ↓0} λ·g(v/λ)`, from the asymptotic slopes.
    pub fn recession(&self, v: f64) -> ExtReal {
        if v == 0.0 {
            return ExtReal::ZERO;
        }
        let (left, right) = self.asymptotic_slopes();
        let slope = if v > 0.0 { right } else { left };
        match slope {
            Some(c) => ExtReal::Finite(c * v),
            None => ExtReal::PosInf,
        }
    }

    /// `λ·g(v/λ)` for `λ > 0`, the recession function at `λ = 0`.
    pub fn perspective(&self, v: f64, lambda: f64) -> Result<ExtReal> {
        if !(lambda >= 0.0) {
            return Err(Error::NegativeMultiplier(lambda));
        }
        if lambda == 0.0 {
            return Ok(self.recession(v));
        }
        if lambda == 1.0 {
            return Ok(ExtReal::from_f64(self.eval(v)));
        }
        let value = match self {
            UnivariateConvex::Quadratic { coef } => coef * v * v / lambda,
            UnivariateConvex::AbsoluteValue => v.abs(),
            UnivariateConvex::PowerAbs { p } if *p == 1.0 => v.abs(),
            UnivariateConvex::PowerAbs { p } => v.abs().powf(*p) * lambda.powf(1.0 - p),
            _ => {
                let s = v / lambda;
                if !s.is_finite() {
                    return Ok(self.recession(v));
                }
                lambda * self.eval(s)
            }
        };
        if value.is_nan() {
            return Ok(self.recession(v));
        }
        Ok(ExtReal::from_f64(value))
    }

    /// `g(s) − g(0) − c·s` for a subgradient `c ∈ ∂g(0)`, so the result is
    /// zero and minimal at the origin.
    pub fn normalize(&self, slope: Slope) -> Result<Self> {
        let (lo, hi) = self.subgradient(0.0);
        let c = match slope {
            Slope::Auto => 0.5 * (lo + hi),
            Slope::Given(c) => {
                if !(c >= lo - DIFF_TOL && c <= hi + DIFF_TOL) {
                    return Err(Error::NotASubgradient { slope: c, lo, hi });
                }
                c
            }
        };
        Ok(self.shift_to_zero(c))
    }

    /// `g(s) − g(0)`, without any slope adjustment.
    pub fn center(&self) -> Self {
        self.shift_to_zero(0.0)
    }

    fn shift_to_zero(&self, c: f64) -> Self {
        let (base, slope_offset) = match self {
            UnivariateConvex::Shifted {
                inner, slope_offset, ..
            } => ((**inner).clone(), *slope_offset),
            other => (other.clone(), 0.0),
        };
        let value_offset = -base.eval(0.0);
        let slope_offset = slope_offset - c;
        if value_offset == 0.0 && slope_offset == 0.0 {
            base
        } else {
            UnivariateConvex::Shifted {
                inner: Box::new(base),
                value_offset,
                slope_offset,
            }
        }
    }

    /// True when `g(0) = 0` and `0 ∈ ∂g(0)`.
    pub fn is_normalized(&self) -> bool {
        let (lo, hi) = self.subgradient(0.0);
        self.eval(0.0) == 0.0 && lo <= DIFF_TOL && hi >= -DIFF_TOL
    }

    /// Fails fast with [`Error::NotNormalized`] or [`Error::NotASubgradient`].
    pub fn require_normalized(&self) -> Result<()> {
        let g0 = self.eval(0.0);
        if g0 != 0.0 {
            return Err(Error::NotNormalized(g0));
        }
        let (lo, hi) = self.subgradient(0.0);
        if lo > DIFF_TOL || hi < -DIFF_TOL {
            return Err(Error::NotASubgradient { slope: 0.0, lo, hi });
        }
        Ok(())
    }

    /// `G(t) = t·g′(t) − g(t)`.
    pub fn big_g(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::OutOfRange { target: t, what: "G argument" });
        }
        Ok(t * self.derivative(t)? - self.eval(t))
    }

    /// The interval `{t·s − g(t) : s ∈ ∂g(t)}`.
    fn big_g_interval(&self, t: f64) -> (f64, f64) {
        let (lo, hi) = self.subgradient(t);
        let v = self.eval(t);
        let (a, b) = (t * lo - v, t * hi - v);
        (a.min(b), a.max(b))
    }

    /// `ĝ(t) = t·g(1/t)` for `t > 0`.
    pub fn hat_g(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::OutOfRange { target: t, what: "hat-g domain (t > 0)" });
        }
        Ok(t * self.eval(1.0 / t))
    }

    /// The `t` with `g′(t) = alpha`.
    pub fn inverse_gprime(&self, alpha: f64) -> Result<f64> {
        monotone_inverse(alpha, f64::NEG_INFINITY, "g'", |t| self.subgradient(t))
    }

    /// The `t > 0` with `G(t) = delta`.
    pub fn inverse_big_g(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0) {
            return Err(Error::OutOfRange { target: delta, what: "G" });
        }
        monotone_inverse(delta, 0.0, "G", |t| self.big_g_interval(t))
    }

    /// Proximal point `argmin_w g(w) + (s − w)²/(2·eps)`.
    pub fn prox(&self, eps: f64, s: f64) -> Result<f64> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::OutOfRange { target: eps, what: "Moreau parameter (eps > 0)" });
        }
        let (lo, hi) = self.subgradient(s);
        let m = lo.abs().max(hi.abs());
        let objective = |w: f64| self.eval(w) + (s - w) * (s - w) / (2.0 * eps);
        let (mut a, mut b) = (s - eps * m, s + eps * m);
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (objective(c), objective(d));
        let target = INVERSE_TOL * 1e-2 * (1.0 + s.abs());
        for _ in 0..400 {
            if b - a <= target {
                break;
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = objective(d);
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Moreau envelope `min_w g(w) + (s − w)²/(2·eps)`.
    pub fn moreau(&self, eps: f64, s: f64) -> Result<f64> {
        let w = self.prox(eps, s)?;
        Ok(self.eval(w) + (s - w) * (s - w) / (2.0 * eps))
    }

    /// Derivative of the Moreau envelope, `(s − prox(s))/eps`.
    pub fn moreau_derivative(&self, eps: f64, s: f64) -> Result<f64> {
        Ok((s - self.prox(eps, s)?) / eps)
    }
}

fn abs_subgradient(s: f64) -> (f64, f64) {
    if s > 0.0 {
        (1.0, 1.0)
    } else if s < 0.0 {
        (-1.0, -1.0)
    } else {
        (-1.0, 1.0)
    }
}

/// Solves `target ∈ F(t)` for a monotone set-valued `F` given by intervals,
/// searching `t > floor` (or all of ℝ when `floor = −∞`).
fn monotone_inverse(
    target: f64,
    floor: f64,
    what: &'static str,
    f: impl Fn(f64) -> (f64, f64),
) -> Result<f64> {
    if !target.is_finite() {
        return Err(Error::OutOfRange { target, what });
    }
    let contains = |(lo, hi): (f64, f64)| {
        let tol = INVERSE_TOL * (1.0 + target.abs());
        lo - tol <= target && target <= hi + tol
    };
    // Upper end of the bracket.
    let mut hi = if floor.is_finite() { floor + 1.0 } else { 1.0 };
    let mut steps = 0;
    while f(hi).0 < target {
        hi = if floor.is_finite() { floor + 2.0 * (hi - floor) } else { 2.0 * hi };
        steps += 1;
        if steps > 1100 || !hi.is_finite() {
            return Err(Error::OutOfRange { target, what });
        }
    }
    let mut lo = if floor.is_finite() {
        floor
    } else {
        let mut lo = -1.0;
        steps = 0;
        while f(lo).1 > target {
            lo *= 2.0;
            steps += 1;
            if steps > 1100 || !lo.is_finite() {
                return Err(Error::OutOfRange { target, what });
            }
        }
        lo
    };
    if floor.is_finite() {
        // F near the floor must lie below the target.
        let probe = floor + f64::MIN_POSITIVE.max(1e-300);
        if f(probe).0 > target + INVERSE_TOL * (1.0 + target.abs()) {
            return Err(Error::OutOfRange { target, what });
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (a, b) = f(mid);
        if b < target {
            lo = mid;
        } else if a > target {
            hi = mid;
        } else {
            return Ok(mid);
        }
        if hi - lo <= INVERSE_TOL * 1e-3 * hi.abs().max(lo.abs()).max(1e-300) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    if contains(f(t)) || contains(f(lo)) || contains(f(hi)) {
        Ok(t)
    } else {
        Err(Error::OutOfRange { target, what })
    }
}
