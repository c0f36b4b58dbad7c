//! Convergence history and the slope-based switching rule.

use serde::{Deserialize, Serialize};

/// Metric in which an iteration was carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActiveMetric {
    C,
    Omega,
}

impl ActiveMetric {
    pub fn label(self) -> &'static str {
        match self {
            ActiveMetric::C => "C",
            ActiveMetric::Omega => "Omega",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub res_max: f64,
    /// `res_i` for the wanted pairs `i < l`.
    pub res: Vec<f64>,
    /// Current Ritz values, ascending, all `k` of them.
    pub theta: Vec<f64>,
    pub mode: ActiveMetric,
    pub reorth: bool,
    /// The iteration fell back to the `Ω`-inner product after a breakdown.
    pub fallback: bool,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverEvent {
    /// Near-neutral or singular-Gram breakdown answered by an `Ω` retry.
    OmegaFallback { iter: usize, reason: String },
    /// One-way switch to the `Ω`-IHL variant.
    Switch { iter: usize },
    /// Blocks dropped from the search space as numerically dependent.
    Dropped { iter: usize, count: usize },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceHistory {
    pub records: Vec<IterationRecord>,
    pub events: Vec<SolverEvent>,
}

impl ConvergenceHistory {
    pub fn res_max_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.res_max).collect()
    }

    pub fn switch_iter(&self) -> Option<usize> {
        self.events.iter().find_map(|e| match e {
            SolverEvent::Switch { iter } => Some(*iter),
            _ => None,
        })
    }

    pub fn fallback_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, SolverEvent::OmegaFallback { .. }))
            .count()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Secant slope `(log10 r_k − log10 r_{k−p}) / p` of the last `p + 1`
/// entries; `None` without enough positive history.
pub fn slope(res_max: &[f64], p: usize) -> Option<f64> {
    if p == 0 || res_max.len() < p + 1 {
        return None;
    }
    let k = res_max.len() - 1;
    let (now, then) = (res_max[k], res_max[k - p]);
    if now <= 0.0 || then <= 0.0 {
        return None;
    }
    Some((now.log10() - then.log10()) / p as f64)
}

/// Stagnation test on the `res_max` series. Active only once the latest
/// value is below `threshold`; fires when the residual went up relative to
/// both of the two previous steps, or when `s_short > s_long / 2`.
pub fn switch_decision(res_max: &[f64], threshold: f64, windows: (usize, usize)) -> bool {
    let Some(&now) = res_max.last() else {
        return false;
    };
    if !(now < threshold) {
        return false;
    }
    let k = res_max.len() - 1;
    if k >= 2 && now > res_max[k - 1].max(res_max[k - 2]) {
        return true;
    }
    match (slope(res_max, windows.0), slope(res_max, windows.1)) {
        (Some(s_short), Some(s_long)) => s_short > s_long / 2.0,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_examples() {
        assert_eq!(slope(&[1e-12; 11], 10), Some(0.0));

        let mut h = vec![1e-10];
        h.extend(std::iter::repeat(1e-11).take(9));
        h.push(10f64.powf(-11.25));
        assert!((slope(&h, 10).unwrap() + 0.125).abs() < 1e-12);
        assert!((slope(&h, 5).unwrap() + 0.05).abs() < 1e-12);
        assert_eq!(slope(&h[..3], 5), None);
    }

    #[test]
    fn switch_examples() {
        assert!(switch_decision(&[2e-12, 1.5e-12, 3e-12], 1e-10, (5, 10)));
        let mut h = vec![1e-10];
        h.extend(std::iter::repeat(1e-11).take(9));
        h.push(10f64.powf(-11.25));
        assert!(switch_decision(&h, 1e-10, (5, 10)));
        assert!(!switch_decision(&[1e-8, 1e-9, 2e-9, 3e-9], 1e-10, (5, 10)));
        assert!(!switch_decision(&[], 1e-10, (5, 10)));
    }

    #[test]
    fn steady_convergence_does_not_switch() {
        let h: Vec<f64> = (0..20).map(|i| 10f64.powi(-2 - i)).collect();
        for end in 1..=h.len() {
            assert!(!switch_decision(&h[..end], 1e-10, (5, 10)));
        }
    }
}
