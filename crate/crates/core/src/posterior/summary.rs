use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
    /// The equal-tailed interval lies strictly on one side of zero.
    pub excludes_zero: bool,
}

/// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    // Same rounding fuzz as R's quantile().
    let fuzz = 4.0 * f64::EPSILON;
    let pos = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = ((pos + fuzz).floor() as usize).min(sorted.len() - 1);
    let mut h = pos - lo as f64;
    if h.abs() < fuzz {
        h = 0.0;
    }
    let hi = (lo + 1).min(sorted.len() - 1);
    if h == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + h * (sorted[hi] - sorted[lo])
    }
}

/// Mean, median, SD (divisor `M − 1`) and the equal-tailed interval at `level`.
pub fn summarize(draws: &[f64], level: f64) -> Summary {
    let m = draws.len();
    assert!(m > 0, "summary of zero draws");
    let mean = draws.iter().sum::<f64>() / m as f64;
    let sd = if m > 1 {
        (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let lower = quantile_sorted(&sorted, tail);
    let upper = quantile_sorted(&sorted, 1.0 - tail);
    Summary {
        mean,
        median: quantile_sorted(&sorted, 0.5),
        sd,
        lower,
        upper,
        excludes_zero: lower > 0.0 || upper < 0.0,
    }
}
