//! Sparse signal denoising instances with outliers.
//!
//! `min Σ (x_i − v_i − c_i)² + Ω Σ_{i>ℓ} (x_i − Σ_{j=1}^{ℓ} α^j x_{i−ℓ+j−1})²`
//! with at most `k1` nonzeros in `x` and `k2` in `v`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.9;
pub const DEFAULT_BIG_M: f64 = 1e4;
/// Nonzeros per spike.
pub const SPIKE_WIDTH: usize = 5;
pub const INSTANCE_SCHEMA: &str = "indicvex-inst/1";

// one random stream per generation stage
const STREAM_SPIKES: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_CORRUPTION: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenoisingInstance {
    pub n: usize,
    pub c: Vec<f64>,
    pub ell: usize,
    pub omega: f64,
    pub alpha: f64,
    pub k1: usize,
    pub k2: usize,
    #[serde(rename = "bigM")]
    pub big_m: f64,
    pub seed: u64,
    pub provenance: String,
}

/// Explicit values replacing the size-derived defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DenoisingOverrides {
    pub spikes: Option<usize>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub alpha: Option<f64>,
    pub big_m: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    schema: String,
    #[serde(flatten)]
    inst: DenoisingInstance,
}

impl DenoisingInstance {
    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.n || self.n < 2 {
            return Err(Error::InvalidInstance(format!("need n ≥ 2 observations, got {} for n = {}", self.c.len(), self.n)));
        }
        if self.ell == 0 || self.ell >= self.n {
            return Err(Error::InvalidInstance(format!("kernel width must be in 1..n, got {}", self.ell)));
        }
        if !(self.omega > 0.0) || !(self.alpha > 0.0) || !(self.big_m > 0.0) {
            return Err(Error::InvalidInstance("Ω, α and M must be positive".into()));
        }
        if self.k1 > self.n || self.k2 > self.n {
            return Err(Error::InvalidInstance("cardinality caps exceed n".into()));
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("observations must be finite".into()));
        }
        Ok(())
    }

    /// `(α¹, …, α^ℓ)`, the weights of `x_{i−ℓ}, …, x_{i−1}` in the smoothness term of `x_i`.
    pub fn kernel(&self) -> Vec<f64> {
        (1..=self.ell).map(|j| self.alpha.powi(j as i32)).collect()
    }

    /// Objective at `(x, v)`.
    pub fn objective(&self, x: &[f64], v: &[f64]) -> f64 {
        let fit: f64 = (0..self.n).map(|i| (x[i] - v[i] - self.c[i]).powi(2)).sum();
        let k = self.kernel();
        let smooth: f64 = (self.ell..self.n)
            .map(|i| {
                let pred: f64 = (0..self.ell).map(|j| k[j] * x[i - self.ell + j]).sum();
                (x[i] - pred).powi(2)
            })
            .sum();
        fit + self.omega * smooth
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = InstanceDoc { schema: INSTANCE_SCHEMA.into(), inst: self.clone() };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.schema != INSTANCE_SCHEMA {
            return Err(Error::Parse(format!("unknown schema {}", doc.schema)));
        }
        doc.inst.validate()?;
        Ok(doc.inst)
    }
}

/// Covariance of a spike: `Σ_ij = min(i,j)(h+1−max(i,j))/(h+1)`, one-based.
pub fn spike_covariance(h: usize) -> DMatrix<f64> {
    DMatrix::from_fn(h, h, |i, j| {
        let (a, b) = ((i.min(j) + 1) as f64, (i.max(j) + 1) as f64);
        a * (h as f64 + 1.0 - b) / (h as f64 + 1.0)
    })
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Signal after spikes, noise and normalization, before corruption.
pub fn clean_signal(n: usize, spikes: usize, seed: u64) -> Result<Vec<f64>> {
    if n < SPIKE_WIDTH {
        return Err(Error::InvalidInstance(format!("n must be at least {SPIKE_WIDTH}")));
    }
    let chol = spike_covariance(SPIKE_WIDTH)
        .cholesky()
        .ok_or_else(|| Error::InvalidInstance("spike covariance is not positive definite".into()))?;
    let l = chol.l();
    let mut c = vec![0.0; n];
    let mut rng = stream(seed, STREAM_SPIKES);
    for _ in 0..spikes {
        // zero-based start so the spike occupies start..start+h
        let start = rng.random_range(0..=n - SPIKE_WIDTH);
        let eps: Vec<f64> = (0..SPIKE_WIDTH).map(|_| StandardNormal.sample(&mut rng)).collect();
        for i in 0..SPIKE_WIDTH {
            let draw: f64 = (0..=i).map(|j| l[(i, j)] * eps[j]).sum();
            c[start + i] += draw;
        }
    }
    let mut rng = stream(seed, STREAM_NOISE);
    for ci in c.iter_mut() {
        let e: f64 = StandardNormal.sample(&mut rng);
        *ci += 0.2 * e;
    }
    let sup = c.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if sup > 0.0 {
        for ci in c.iter_mut() {
            *ci /= sup;
        }
    }
    Ok(c)
}

/// Seeded instance. Without overrides `n` must be at least 50 so that the
/// spike count `⌊n/50⌋` is positive; `k1 = ⌊3n/50⌋`, `k2 = ⌊n/100⌋`.
pub fn generate_denoising(n: usize, ell: usize, omega: f64, seed: u64, over: DenoisingOverrides) -> Result<DenoisingInstance> {
    if over.spikes.is_none() && n < 50 {
        return Err(Error::InvalidInstance(format!("n = {n} is below 50; give the spike count explicitly")));
    }
    let spikes = over.spikes.unwrap_or(n / 50);
    let k1 = over.k1.unwrap_or(3 * n / 50);
    let k2 = over.k2.unwrap_or(n / 100);
    let mut c = clean_signal(n, spikes, seed)?;
    let mut rng = stream(seed, STREAM_CORRUPTION);
    for _ in 0..k2 {
        let i = rng.random_range(0..n);
        let e: f64 = StandardNormal.sample(&mut rng);
        c[i] += 4.0 * e;
    }
    let inst = DenoisingInstance {
        n,
        c,
        ell,
        omega,
        alpha: over.alpha.unwrap_or(DEFAULT_ALPHA),
        k1,
        k2,
        big_m: over.big_m.unwrap_or(DEFAULT_BIG_M),
        seed,
        provenance: format!("generate_denoising n={n} ell={ell} omega={omega} seed={seed} spikes={spikes}"),
    };
    inst.validate()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        let inst = generate_denoising(100, 1, 0.05, 3, DenoisingOverrides::default()).unwrap();
        assert_eq!((inst.k1, inst.k2), (6, 1));
        assert!(inst.provenance.contains("spikes=2"));
        assert!(generate_denoising(20, 1, 0.05, 3, DenoisingOverrides::default()).is_err());
    }

    #[test]
    fn repeatable() {
        let a = generate_denoising(100, 2, 0.05, 11, DenoisingOverrides::default()).unwrap();
        let b = generate_denoising(100, 2, 0.05, 11, DenoisingOverrides::default()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = generate_denoising(100, 2, 0.05, 12, DenoisingOverrides::default()).unwrap();
        assert_ne!(a.c, c.c);
    }

    #[test]
    fn normalized_before_corruption() {
        let c = clean_signal(100, 2, 5).unwrap();
        let sup = c.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!((sup - 1.0).abs() < 1e-15);
    }

    #[test]
    fn covariance_is_symmetric_bridge() {
        let s = spike_covariance(5);
        assert_eq!(s, s.transpose());
        // agrees with i(h+1−j)/(h+1) for i ≤ j
        assert!((s[(1, 3)] - 2.0 * 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let a = generate_denoising(60, 1, 0.25, 2, DenoisingOverrides::default()).unwrap();
        let text = a.to_json().unwrap();
        assert!(text.contains("\"schema\": \"indicvex-inst/1\""));
        assert_eq!(DenoisingInstance::from_json(&text).unwrap(), a);
    }
}
