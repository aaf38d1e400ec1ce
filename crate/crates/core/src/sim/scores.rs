//! Bias, RMSE, coverage and interval width over replicates.

use serde::{Deserialize, Serialize};

/// One replicate's point estimate and optional interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub point: f64,
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScores {
    pub bias: f64,
    pub rmse: f64,
    /// `None` when no replicate produced an interval.
    pub cover: Option<f64>,
    pub width: Option<f64>,
    /// Replicates with a point estimate.
    pub n_points: usize,
    /// Replicates with an interval.
    pub n_intervals: usize,
}

/// Scores for one estimator over a list of targets (cells or areas).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateScores {
    pub estimator: String,
    pub truths: Vec<f64>,
    /// `[replicate][target]`.
    pub estimates: Vec<Vec<Option<Estimate>>>,
    /// `None` where no replicate produced an estimate.
    pub scores: Vec<Option<TargetScores>>,
}

/// Scores one target; replicates without an estimate are skipped, and
/// those without an interval are left out of Cover and Width.
pub fn score_target(truth: f64, estimates: &[Option<Estimate>]) -> Option<TargetScores> {
    let points: Vec<&Estimate> = estimates.iter().flatten().collect();
    if points.is_empty() {
        return None;
    }
    let r = points.len() as f64;
    let bias = points.iter().map(|e| e.point - truth).sum::<f64>() / r;
    let rmse = (points.iter().map(|e| (e.point - truth).powi(2)).sum::<f64>() / r).sqrt();
    let intervals: Vec<(f64, f64)> = points.iter().filter_map(|e| e.interval).collect();
    let (cover, width) = if intervals.is_empty() {
        (None, None)
    } else {
        let k = intervals.len() as f64;
        let hits = intervals.iter().filter(|(lo, hi)| *lo <= truth && truth <= *hi).count();
        let width = intervals.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / k;
        (Some(hits as f64 / k), Some(width))
    };
    Some(TargetScores {
        bias,
        rmse,
        cover,
        width,
        n_points: points.len(),
        n_intervals: intervals.len(),
    })
}

/// Scores every target from `[replicate][target]` estimates.
pub fn score_estimators(estimator: &str, truths: &[f64], estimates: Vec<Vec<Option<Estimate>>>) -> ReplicateScores {
    let scores = (0..truths.len())
        .map(|j| {
            let column: Vec<Option<Estimate>> = estimates.iter().map(|row| row[j]).collect();
            score_target(truths[j], &column)
        })
        .collect();
    ReplicateScores {
        estimator: estimator.to_string(),
        truths: truths.to_vec(),
        estimates,
        scores,
    }
}

impl ReplicateScores {
    /// Mean of `metric` over targets selected by `keep` that have scores.
    pub fn average(&self, keep: impl Fn(usize) -> bool, metric: impl Fn(&TargetScores) -> Option<f64>) -> Option<f64> {
        let vals: Vec<f64> = self
            .scores
            .iter()
            .enumerate()
            .filter(|(j, _)| keep(*j))
            .filter_map(|(_, s)| s.as_ref().and_then(&metric))
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn est(point: f64, interval: Option<(f64, f64)>) -> Option<Estimate> {
        Some(Estimate { point, interval })
    }

    #[test]
    fn exact_estimates() {
        let s = score_target(3.0, &[est(3.0, Some((2.0, 4.0))), est(3.0, Some((1.0, 5.0)))]).unwrap();
        assert_eq!((s.bias, s.rmse, s.cover, s.width), (0.0, 0.0, Some(1.0), Some(3.0)));
    }

    #[test]
    fn plus_minus_one() {
        let s = score_target(0.0, &[est(1.0, None), est(-1.0, None)]).unwrap();
        assert_eq!((s.bias, s.rmse), (0.0, 1.0));
        assert_eq!((s.cover, s.width, s.n_intervals), (None, None, 0));
    }

    #[test]
    fn missing_intervals_excluded() {
        let s = score_target(0.0, &[est(0.5, Some((0.0, 1.0))), est(2.0, None), None, est(1.0, Some((0.5, 1.5)))]).unwrap();
        assert_eq!(s.n_points, 3);
        assert_eq!(s.n_intervals, 2);
        assert_eq!(s.cover, Some(0.5));
        assert_eq!(s.width, Some(1.0));
        assert!(score_target(0.0, &[None, None]).is_none());
    }

    proptest! {
        #[test]
        fn bias_variance_identity(truth in -50f64..50.0, pts in prop::collection::vec(-100f64..100.0, 1..40)) {
            let e: Vec<Option<Estimate>> = pts.iter().map(|&p| est(p, Some((p - 1.0, p + 1.0)))).collect();
            let s = score_target(truth, &e).unwrap();
            let r = pts.len() as f64;
            let mean = pts.iter().sum::<f64>() / r;
            let var = pts.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / r;
            prop_assert!((s.rmse.powi(2) - (s.bias.powi(2) + var)).abs() <= 1e-10 * (1.0 + s.rmse.powi(2)));
            prop_assert!(s.rmse >= s.bias.abs() - 1e-12);
            prop_assert!((0.0..=1.0).contains(&s.cover.unwrap()));
            prop_assert!(s.width.unwrap() >= 0.0);
        }
    }
}
