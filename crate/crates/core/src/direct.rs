//! Design-based direct estimates under simple random sampling.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::Result;
use crate::panel::{Cell, DirectTable, PanelIndex};

/// Sample mean, or `None` for an empty sample.
pub fn direct_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Variance of the sample mean, `Σ(y - ȳ)² / (n(n-1))`, for `n >= 2`.
///
/// Computed in two passes; identical values give exactly zero.
pub fn direct_variance(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = direct_mean(values)?;
    if values.iter().all(|&v| v == values[0]) {
        return Some(0.0);
    }
    let ss: f64 = values.iter().map(|y| (y - mean).powi(2)).sum();
    Some(ss / (n as f64 * (n as f64 - 1.0)))
}

/// Unit-level measurements keyed by 0-based `(area, time)`.
#[derive(Debug, Clone, Default)]
pub struct UnitObservations {
    cells: BTreeMap<(usize, usize), Vec<f64>>,
}

impl UnitObservations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, area: usize, time: usize, value: f64) {
        self.cells.entry((area, time)).or_default().push(value);
    }

    pub fn extend(&mut self, area: usize, time: usize, values: impl IntoIterator<Item = f64>) {
        self.cells.entry((area, time)).or_default().extend(values);
    }

    pub fn get(&self, area: usize, time: usize) -> &[f64] {
        self.cells.get(&(area, time)).map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn direct_cell(values: &[f64]) -> Cell {
    Cell::new(values.len(), direct_mean(values), direct_variance(values))
        .expect("direct statistics of finite data are valid")
}

/// Scores every panel cell; cells without observations are NO_PLOTS.
pub fn build_direct_table(obs: &UnitObservations, index: PanelIndex) -> Result<DirectTable> {
    for &(area, time) in obs.cells.keys() {
        index.checked_flat(area, time)?;
    }
    let cells = (0..index.len())
        .map(|i| {
            let (area, time) = index.unflat(i);
            direct_cell(obs.get(area, time))
        })
        .collect();
    DirectTable::new(index, cells)
}

/// Student-t confidence interval `μ̂ ± t_{n-1} σ̂` for cells with `n >= 2`
/// and a direct variance.
pub fn direct_interval(cell: &Cell, level: f64) -> Option<(f64, f64)> {
    let (mu, var) = (cell.mu_hat?, cell.sigma2_hat?);
    if cell.n < 2 {
        return None;
    }
    let t = StudentsT::new(0.0, 1.0, (cell.n - 1) as f64).ok()?;
    let half = t.inverse_cdf(0.5 + level / 2.0) * var.sqrt();
    Some((mu - half, mu + half))
}

/// Least-squares slope of the direct means over time with its sampling
/// variance `Σ c_t² σ̂²_t`, `c_t = (t − t̄)/Σ(t − t̄)²`.
///
/// `None` unless every cell has a mean and `T >= 2`; the variance is
/// `None` unless every cell also has a direct variance.
pub fn direct_trend(series: &[Cell]) -> Option<(f64, Option<f64>)> {
    let t = series.len();
    if t < 2 {
        return None;
    }
    let means: Option<Vec<f64>> = series.iter().map(|c| c.mu_hat).collect();
    let means = means?;
    let t_bar = (t as f64 - 1.0) / 2.0;
    let sxx: f64 = (0..t).map(|s| (s as f64 - t_bar).powi(2)).sum();
    let m_bar = means.iter().sum::<f64>() / t as f64;
    let slope = (0..t).map(|s| (s as f64 - t_bar) * (means[s] - m_bar)).sum::<f64>() / sxx;
    let var = series
        .iter()
        .enumerate()
        .map(|(s, c)| c.sigma2_hat.map(|v| ((s as f64 - t_bar) / sxx).powi(2) * v))
        .sum::<Option<f64>>();
    Some((slope, var))
}

/// `μ̂_{t2} − μ̂_{t1}` with variance `σ̂²_{t1} + σ̂²_{t2}` when both exist.
pub fn direct_change(first: &Cell, second: &Cell) -> Option<(f64, Option<f64>)> {
    let d = second.mu_hat? - first.mu_hat?;
    let var = first.sigma2_hat.zip(second.sigma2_hat).map(|(a, b)| a + b);
    Some((d, var))
}

/// `point ± z σ` at the given two-sided level.
pub fn normal_interval(point: f64, variance: f64, level: f64) -> (f64, f64) {
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + level / 2.0);
    let half = z * variance.sqrt();
    (point - half, point + half)
}
