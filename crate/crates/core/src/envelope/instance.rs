use serde::{Deserialize, Serialize};

use crate::convex::{Slope, UnivariateConvex};
use crate::error::{Error, Result};

/// `f(x) = g(aᵀx) + cᵀx + offset` with `x_i ≥ 0` for `i ∈ iplus`.
///
/// `g` is normalized (`g(0) = 0`, minimal at 0) and every `a_i` is nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneInstance {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    /// Sorted, duplicate free, zero-based.
    pub iplus: Vec<usize>,
    pub g: UnivariateConvex,
    pub offset: f64,
}

/// Which side dominates `Σ |a_i| x_i` in the nonnegative case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

impl RankOneInstance {
    /// Checks the invariants; `g` must already be normalized.
    pub fn new(a: Vec<f64>, c: Vec<f64>, iplus: Vec<usize>, g: UnivariateConvex) -> Result<Self> {
        let inst = RankOneInstance {
            a,
            c,
            iplus: canonical_index_set(iplus),
            g,
            offset: 0.0,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Instance with `c = 0`.
    pub fn homogeneous(a: Vec<f64>, iplus: Vec<usize>, g: UnivariateConvex) -> Result<Self> {
        let n = a.len();
        Self::new(a, vec![0.0; n], iplus, g)
    }

    /// Accepts any finite convex `g` and folds `g(0)` into the offset and a
    /// subgradient `s ∈ ∂g(0)` into the linear term (`c ← c + s·a`).
    pub fn normalizing(a: Vec<f64>, c: Vec<f64>, iplus: Vec<usize>, g: UnivariateConvex, slope: Slope) -> Result<Self> {
        g.validate()?;
        let (lo, hi) = g.subgradient(0.0);
        let s = match slope {
            Slope::Auto => 0.5 * (lo + hi),
            Slope::Given(s) => s,
        };
        let g0 = g.eval(0.0);
        let gn = g.normalize(Slope::Given(s))?;
        if a.len() != c.len() {
            return Err(Error::Dimension(format!("a has length {}, c has length {}", a.len(), c.len())));
        }
        let c = c.iter().zip(&a).map(|(ci, ai)| ci + s * ai).collect();
        let mut inst = RankOneInstance::new(a, c, iplus, gn)?;
        inst.offset = g0;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.len();
        if n == 0 {
            return Err(Error::InvalidInstance("rank-one instance needs n ≥ 1".into()));
        }
        if self.c.len() != n {
            return Err(Error::Dimension(format!("a has length {n}, c has length {}", self.c.len())));
        }
        if let Some(i) = self.a.iter().position(|&ai| ai == 0.0 || !ai.is_finite()) {
            return Err(Error::InvalidInstance(format!("a_{} must be finite and nonzero", i + 1)));
        }
        if self.c.iter().any(|ci| !ci.is_finite()) || !self.offset.is_finite() {
            return Err(Error::InvalidInstance("c and offset must be finite".into()));
        }
        if let Some(&i) = self.iplus.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidInstance(format!("nonnegative index {} out of range", i + 1)));
        }
        self.g.validate()?;
        self.g.require_normalized()
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn is_free(&self) -> bool {
        self.iplus.is_empty()
    }

    pub fn is_nonneg(&self) -> bool {
        self.iplus.len() == self.n()
    }

    pub fn is_same_sign_positive(&self) -> bool {
        self.a.iter().all(|&ai| ai > 0.0)
    }

    pub fn has_linear_part(&self) -> bool {
        self.c.iter().any(|&ci| ci != 0.0) || self.offset != 0.0
    }

    /// `cᵀx + offset`.
    pub fn affine_part(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.offset
    }

    pub fn ax(&self, x: &[f64]) -> f64 {
        self.a.iter().zip(x).map(|(a, x)| a * x).sum()
    }

    /// The function value `f(x)`.
    pub fn f(&self, x: &[f64]) -> f64 {
        self.g.eval(self.ax(x)) + self.affine_part(x)
    }

    /// Indices with `a_i > 0` and `a_i < 0`.
    pub fn sign_split(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.n()).partition(|&i| self.a[i] > 0.0)
    }

    /// Same instance with `c = 0` and no offset.
    pub fn without_linear_part(&self) -> Self {
        RankOneInstance {
            c: vec![0.0; self.n()],
            offset: 0.0,
            ..self.clone()
        }
    }

    pub fn check_point(&self, p: &EnvelopePoint) -> Result<()> {
        p.validate()?;
        if p.x.len() != self.n() {
            return Err(Error::Dimension(format!("point has dimension {}, instance {}", p.x.len(), self.n())));
        }
        if let Some(&i) = self.iplus.iter().find(|&&i| p.x[i] < 0.0) {
            return Err(Error::InvalidInstance(format!("x_{} = {} violates nonnegativity", i + 1, p.x[i])));
        }
        Ok(())
    }
}

/// A point `(x, z)` with `0 ≤ z ≤ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl EnvelopePoint {
    pub fn new(x: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        let p = EnvelopePoint { x, z };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.z.len() {
            return Err(Error::Dimension(format!("x has length {}, z has length {}", self.x.len(), self.z.len())));
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("x must be finite".into()));
        }
        if let Some(i) = self.z.iter().position(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidInstance(format!("z_{} = {} is outside [0, 1]", i + 1, self.z[i])));
        }
        Ok(())
    }
}

pub(crate) fn canonical_index_set(mut idx: Vec<usize>) -> Vec<usize> {
    idx.sort_unstable();
    idx.dedup();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizing_folds_slope_and_value() {
        // g(s) = s² + 3s + 1 as a shifted quadratic
        let g = UnivariateConvex::shifted(UnivariateConvex::quadratic(1.0).unwrap(), 1.0, 3.0);
        let inst = RankOneInstance::normalizing(vec![1.0, -2.0], vec![0.5, 0.0], vec![], g.clone(), Slope::Auto).unwrap();
        assert_eq!(inst.offset, 1.0);
        assert_eq!(inst.c, vec![3.5, -6.0]);
        for x in [[0.3, -1.2], [2.0, 0.7]] {
            let s = x[0] - 2.0 * x[1];
            let direct = g.eval(s) + 0.5 * x[0];
            assert!((inst.f(&x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_data() {
        let q = UnivariateConvex::quadratic(1.0).unwrap();
        assert!(RankOneInstance::homogeneous(vec![1.0, 0.0], vec![], q.clone()).is_err());
        assert!(RankOneInstance::homogeneous(vec![], vec![], q.clone()).is_err());
        assert!(RankOneInstance::homogeneous(vec![1.0], vec![3], q.clone()).is_err());
        assert!(RankOneInstance::homogeneous(vec![1.0], vec![], UnivariateConvex::Logistic).is_err());
        assert!(EnvelopePoint::new(vec![1.0], vec![1.5]).is_err());
        let inst = RankOneInstance::homogeneous(vec![1.0], vec![0], q).unwrap();
        assert!(inst.check_point(&EnvelopePoint::new(vec![-1.0], vec![0.5]).unwrap()).is_err());
    }
}
