//! Gap and root-improvement percentages.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A percentage, `None` when its denominator vanishes.
pub type Metric = Option<f64>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricInputs {
    /// Best feasible objective.
    pub best: f64,
    /// Continuous relaxation of the formulation being reported.
    pub cont: f64,
    pub basic: Option<f64>,
    pub rankone: Option<f64>,
    pub ranktwo: Option<f64>,
    /// Lower bound at termination.
    pub bound: Option<f64>,
    pub nodes: Option<usize>,
    pub time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub igap: Metric,
    /// `(incumbent − bound)/|incumbent|·100`.
    pub egap: Metric,
    pub ri_basic: Metric,
    pub ri_rankone: Metric,
    pub nodes: Option<usize>,
    pub time: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Metric {
    (den != 0.0 && num.is_finite() && den.is_finite()).then(|| num / den * 100.0)
}

/// `(best − cont)/|best|·100`.
pub fn initial_gap(best: f64, cont: f64) -> Metric {
    ratio(best - cont, best.abs())
}

/// `(ranktwo − base)/(best − base)·100`.
pub fn root_improvement(best: f64, base: f64, ranktwo: f64) -> Metric {
    ratio(ranktwo - base, best - base)
}

pub fn compute_metrics(m: &MetricInputs) -> MetricsReport {
    MetricsReport {
        igap: initial_gap(m.best, m.cont),
        egap: m.bound.and_then(|b| ratio(m.best - b, m.best.abs())),
        ri_basic: m.basic.zip(m.ranktwo).and_then(|(b, r)| root_improvement(m.best, b, r)),
        ri_rankone: m.rankone.zip(m.ranktwo).and_then(|(b, r)| root_improvement(m.best, b, r)),
        nodes: m.nodes,
        time: m.time,
    }
}

fn show(m: Metric) -> String {
    m.map_or_else(|| "undefined".to_string(), |v| format!("{v:.2}"))
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IGap={} EGap={} RI-basic={} RI-rankOne={}",
            show(self.igap),
            show(self.egap),
            show(self.ri_basic),
            show(self.ri_rankone)
        )?;
        if let Some(n) = self.nodes {
            write!(f, " Nodes={n}")?;
        }
        if let Some(t) = self.time {
            write!(f, " Time={t:.3}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_numbers() {
        let r = compute_metrics(&MetricInputs { best: 1.47, cont: 1.09, ..Default::default() });
        assert!((r.igap.unwrap() - 25.85).abs() < 0.01);
        assert!(r.to_string().starts_with("IGap=25.85"));
    }

    #[test]
    fn boundaries() {
        assert_eq!(initial_gap(2.0, 2.0), Some(0.0));
        assert_eq!(root_improvement(1.0, 0.0, 1.0), Some(100.0));
        assert_eq!(root_improvement(1.0, 0.0, 0.0), Some(0.0));
        assert_eq!(initial_gap(0.0, -1.0), None);
        assert_eq!(root_improvement(1.0, 1.0, 1.0), None);
        assert!(compute_metrics(&MetricInputs::default()).to_string().contains("undefined"));
    }
}
