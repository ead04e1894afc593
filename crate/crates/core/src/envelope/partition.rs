//! Partition search for the nonnegative rank-one envelope.
//!
//! Weights are `w_i = |a_i| x_i`. The dominant side `D` is the sign class with
//! the larger total weight (ties go to the negative class). Its indices with
//! `x_i > 0` split into `P` (`z_i > 0`) and `N₀` (`z_i = 0`). `P` is sorted by
//! the ratio `w_i / z_i` and cut into consecutive blocks `L`, `M`, `U`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::instance::{EnvelopePoint, RankOneInstance, Side};

/// Absolute tolerance on the ratio scale for the partition inequalities.
pub const PARTITION_TOL: f64 = 1e-12;

/// Maximum or minimum of a possibly empty set, with the empty-set values
/// `−∞` (max) and `+∞` (min) kept symbolic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extremum {
    NegInfinity,
    Value(f64),
    PosInfinity,
}

impl Extremum {
    pub fn max_of(values: impl IntoIterator<Item = f64>) -> Self {
        values
            .into_iter()
            .fold(Extremum::NegInfinity, |acc, v| match acc {
                Extremum::Value(a) if a >= v => acc,
                _ => Extremum::Value(v),
            })
    }

    pub fn min_of(values: impl IntoIterator<Item = f64>) -> Self {
        values
            .into_iter()
            .fold(Extremum::PosInfinity, |acc, v| match acc {
                Extremum::Value(a) if a <= v => acc,
                _ => Extremum::Value(v),
            })
    }

    fn rank(self) -> i8 {
        match self {
            Extremum::NegInfinity => -1,
            Extremum::Value(_) => 0,
            Extremum::PosInfinity => 1,
        }
    }
}

/// Outcome of one inequality test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Check {
    Fail,
    /// Holds only within tolerance.
    Border,
    Pass,
}

fn strict_lt(a: Extremum, b: Extremum) -> Check {
    match (a, b) {
        (Extremum::Value(a), Extremum::Value(b)) => {
            let tol = PARTITION_TOL * a.abs().max(b.abs()).max(1.0);
            if a < b - tol {
                Check::Pass
            } else if a <= b + tol {
                Check::Border
            } else {
                Check::Fail
            }
        }
        _ if a.rank() < b.rank() => Check::Pass,
        _ => Check::Fail,
    }
}

fn weak_le(a: Extremum, b: Extremum) -> Check {
    match (a, b) {
        (Extremum::Value(a), Extremum::Value(b)) => {
            let tol = PARTITION_TOL * a.abs().max(b.abs()).max(1.0);
            if a <= b + tol {
                Check::Pass
            } else {
                Check::Fail
            }
        }
        _ if a.rank() <= b.rank() => Check::Pass,
        _ => Check::Fail,
    }
}

fn v(x: f64) -> Extremum {
    Extremum::Value(x)
}

/// Weight data of the dominant side at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct SideData {
    pub side: Side,
    /// `|a_i| x_i` for every index.
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    /// Dominant-side indices with `x_i > 0` and `z_i > 0`, sorted by ratio then index.
    pub sorted: Vec<usize>,
    /// Dominant-side indices with `x_i > 0` and `z_i = 0`.
    pub zero_z: Vec<usize>,
    /// Total weight of the other side.
    pub w_other: f64,
    /// Total weight of the dominant side.
    pub w_dom: f64,
}

impl SideData {
    pub fn new(inst: &RankOneInstance, p: &EnvelopePoint) -> Self {
        let n = inst.n();
        let w: Vec<f64> = (0..n).map(|i| inst.a[i].abs() * p.x[i]).collect();
        let (plus, minus) = inst.sign_split();
        let wp: f64 = plus.iter().map(|&i| w[i]).sum();
        let wm: f64 = minus.iter().map(|&i| w[i]).sum();
        let (side, dom, w_dom, w_other) = if wp > wm {
            (Side::Plus, plus, wp, wm)
        } else {
            (Side::Minus, minus, wm, wp)
        };
        let mut sorted: Vec<usize> = dom.iter().copied().filter(|&i| p.x[i] > 0.0 && p.z[i] > 0.0).collect();
        let zero_z = dom.iter().copied().filter(|&i| p.x[i] > 0.0 && p.z[i] == 0.0).collect();
        sorted.sort_by(|&i, &j| {
            (w[i] / p.z[i])
                .partial_cmp(&(w[j] / p.z[j]))
                .unwrap_or(Ordering::Equal)
                .then(i.cmp(&j))
        });
        SideData {
            side,
            w,
            z: p.z.clone(),
            sorted,
            zero_z,
            w_other,
            w_dom,
        }
    }

    pub fn ratio(&self, i: usize) -> f64 {
        self.w[i] / self.z[i]
    }

    pub fn weight(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.w[i]).sum()
    }

    pub fn z_sum(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.z[i]).sum()
    }
}

/// A partition `L ∪ M ∪ U` of the dominant side's support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionLMU {
    pub side: Side,
    pub l: Vec<usize>,
    pub m: Vec<usize>,
    pub u: Vec<usize>,
    /// Dominant-side indices with `x_i > 0 = z_i`; multiplier fixed at 0.
    pub zero_z: Vec<usize>,
    /// Some strict inequality holds only within [`PARTITION_TOL`].
    pub borderline: bool,
}

/// The derived scalars of a partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionScalars {
    /// `w(L)`.
    pub w_l: f64,
    /// `1 − z(M) − z(U)`.
    pub zbar: f64,
    /// Residual weight assigned to `U` and `N₀`: `w(U) + w(N₀) − w(other side)`.
    pub cbar: f64,
    /// `z(U)`.
    pub z_u: f64,
}

impl PartitionLMU {
    pub fn scalars(&self, data: &SideData) -> PartitionScalars {
        PartitionScalars {
            w_l: data.weight(&self.l),
            zbar: 1.0 - data.z_sum(&self.m) - data.z_sum(&self.u),
            cbar: data.weight(&self.u) + data.weight(&self.zero_z) - data.w_other,
            z_u: data.z_sum(&self.u),
        }
    }
}

fn check_cut(data: &SideData, l: &[usize], m: &[usize], u: &[usize], allow_u: bool) -> Check {
    let z_m = data.z_sum(m);
    let z_u = data.z_sum(u);
    let zbar = 1.0 - z_m - z_u;
    let mut worst = Check::Pass;
    let mut l_ratio = Extremum::NegInfinity;
    if l.is_empty() {
        worst = worst.min(weak_le(v(0.0), v(zbar)));
    } else {
        worst = worst.min(strict_lt(v(0.0), v(zbar)));
        if zbar <= 0.0 {
            return Check::Fail;
        }
        let r_l = data.weight(l) / zbar;
        l_ratio = v(r_l);
        worst = worst.min(strict_lt(Extremum::max_of(l.iter().map(|&i| data.ratio(i))), v(r_l)));
        worst = worst.min(weak_le(v(r_l), Extremum::min_of(m.iter().map(|&i| data.ratio(i)))));
    }
    if worst == Check::Fail {
        return worst;
    }
    let w_n0 = data.weight(&data.zero_z);
    let cbar = data.weight(u) + w_n0 - data.w_other;
    if !u.is_empty() {
        if !allow_u {
            return Check::Fail;
        }
        worst = worst.min(strict_lt(v(0.0), v(cbar)));
        if cbar <= 0.0 {
            return Check::Fail;
        }
        let r_u = cbar / z_u;
        worst = worst.min(weak_le(Extremum::max_of(m.iter().map(|&i| data.ratio(i))), v(r_u)));
        worst = worst.min(strict_lt(v(r_u), Extremum::min_of(u.iter().map(|&i| data.ratio(i)))));
        worst = worst.min(weak_le(l_ratio, v(r_u)));
    } else {
        let tol = PARTITION_TOL * data.w_dom.max(1.0);
        if cbar < -tol || cbar > w_n0 + tol {
            return Check::Fail;
        }
    }
    worst
}

fn first_valid(data: &SideData, candidates: impl Iterator<Item = (usize, usize)>, allow_u: bool) -> Option<PartitionLMU> {
    let s = &data.sorted;
    let mut border: Option<PartitionLMU> = None;
    for (k1, k2) in candidates {
        let (l, m, u) = (&s[..k1], &s[k1..k2], &s[k2..]);
        let check = check_cut(data, l, m, u, allow_u);
        if check == Check::Fail {
            continue;
        }
        let part = PartitionLMU {
            side: data.side,
            l: l.to_vec(),
            m: m.to_vec(),
            u: u.to_vec(),
            zero_z: data.zero_z.clone(),
            borderline: check == Check::Border,
        };
        if check == Check::Pass {
            return Some(part);
        }
        if border.is_none() {
            border = Some(part);
        }
    }
    border
}

/// First cut `(k₁, k₂)` in lexicographic order whose blocks satisfy every
/// partition inequality. Returns `None` when no cut qualifies or when the
/// only description is the trivial one (everything in `L`, no residual),
/// in which case the envelope equals `f(x)`.
pub fn partition_search(inst: &RankOneInstance, p: &EnvelopePoint) -> Option<PartitionLMU> {
    let data = SideData::new(inst, p);
    partition_search_data(&data)
}

pub(crate) fn partition_search_data(data: &SideData) -> Option<PartitionLMU> {
    let len = data.sorted.len();
    let cuts = (0..=len).flat_map(move |k1| (k1..=len).map(move |k2| (k1, k2)));
    let part = first_valid(data, cuts, true)?;
    let trivial = !part.l.is_empty() && part.m.is_empty() && part.u.is_empty() && part.zero_z.is_empty();
    if trivial {
        None
    } else {
        Some(part)
    }
}

/// Two-block version for instances whose coefficients share one sign:
/// `U` is always empty and `L` may cover the whole support.
pub fn partition_search_samesign(inst: &RankOneInstance, p: &EnvelopePoint) -> Option<PartitionLMU> {
    let data = SideData::new(inst, p);
    let len = data.sorted.len();
    first_valid(&data, (0..=len).map(move |k| (k, len)), false)
}
