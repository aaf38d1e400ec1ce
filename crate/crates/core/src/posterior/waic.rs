//! WAIC over OBSERVED cells and pairwise elpd comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::PosteriorDraws;
use crate::panel::Cell;

/// `log N(μ̂_i | μ_i, σ²_i)` per draw (rows) and OBSERVED cell (columns).
pub fn pointwise_log_lik(draws: &PosteriorDraws, cells: &[Cell]) -> Vec<Vec<f64>> {
    let observed = &draws.layout.observed;
    let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    draws
        .states
        .iter()
        .map(|s| {
            observed
                .iter()
                .map(|&i| {
                    let mu_hat = cells[i].mu_hat.expect("observed direct mean");
                    let s2 = s.sigma2_cell[i].expect("observed cell variance");
                    -half_log_2pi - 0.5 * s2.ln() - (mu_hat - s.mu[i]).powi(2) / (2.0 * s2)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseWaic {
    pub cell: usize,
    pub lpd: f64,
    pub p_waic: f64,
    pub elpd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaicReport {
    pub lpd: f64,
    pub p_waic: f64,
    pub elpd: f64,
    pub waic: f64,
    /// `sqrt(n · var(elpd_i))`.
    pub elpd_se: f64,
    pub pointwise: Vec<PointwiseWaic>,
}

fn log_mean_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + (x.iter().map(|v| (v - max).exp()).sum::<f64>() / x.len() as f64).ln()
}

fn sample_var(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// WAIC from an `M × n` log-likelihood matrix; `cells[c]` labels column `c`.
pub fn waic(log_lik: &[Vec<f64>], cells: &[usize]) -> Result<WaicReport> {
    for (l, row) in log_lik.iter().enumerate() {
        if row.len() != cells.len() {
            return Err(Error::InvalidSpec(format!("log-likelihood row {l} has {} cells, expected {}", row.len(), cells.len())));
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLogLik { draw: l, cell: cells[c] });
        }
    }
    let mut column = vec![0.0; log_lik.len()];
    let pointwise: Vec<PointwiseWaic> = cells
        .iter()
        .enumerate()
        .map(|(c, &cell)| {
            for (dst, row) in column.iter_mut().zip(log_lik) {
                *dst = row[c];
            }
            let lpd = if column.is_empty() { f64::NAN } else { log_mean_exp(&column) };
            let p_waic = sample_var(&column);
            PointwiseWaic {
                cell,
                lpd,
                p_waic,
                elpd: lpd - p_waic,
            }
        })
        .collect();
    let lpd: f64 = pointwise.iter().map(|p| p.lpd).sum();
    let p_waic: f64 = pointwise.iter().map(|p| p.p_waic).sum();
    let elpd = lpd - p_waic;
    let per: Vec<f64> = pointwise.iter().map(|p| p.elpd).collect();
    Ok(WaicReport {
        lpd,
        p_waic,
        elpd,
        waic: -2.0 * elpd,
        elpd_se: (per.len() as f64 * sample_var(&per)).sqrt(),
        pointwise,
    })
}

pub fn waic_from_draws(draws: &PosteriorDraws, cells: &[Cell]) -> Result<WaicReport> {
    waic(&pointwise_log_lik(draws, cells), &draws.layout.observed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElpdDiff {
    /// `Σ_i (elpd_{a,i} − elpd_{b,i})` over shared cells.
    pub diff: f64,
    /// `sqrt(n · var(elpd_{a,i} − elpd_{b,i}))`.
    pub se: f64,
    pub n_cells: usize,
}

/// Paired elpd difference `a − b` over the cells both reports share.
pub fn elpd_diff(a: &WaicReport, b: &WaicReport) -> ElpdDiff {
    let b_map: BTreeMap<usize, f64> = b.pointwise.iter().map(|p| (p.cell, p.elpd)).collect();
    let d: Vec<f64> = a
        .pointwise
        .iter()
        .filter_map(|p| b_map.get(&p.cell).map(|e| p.elpd - e))
        .collect();
    ElpdDiff {
        diff: d.iter().sum(),
        se: (d.len() as f64 * sample_var(&d)).sqrt(),
        n_cells: d.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub elpd: f64,
    pub waic: f64,
    /// Relative to the best model; zero for the best itself.
    pub elpd_diff: f64,
    pub se_diff: f64,
}

/// Ranks models by elpd over their shared cells, best first.
pub fn compare(reports: &[(String, WaicReport)]) -> Vec<ComparisonRow> {
    let Some(best) = (0..reports.len()).max_by(|&i, &j| {
        let d = elpd_diff(&reports[i].1, &reports[j].1).diff;
        d.total_cmp(&0.0).then(j.cmp(&i))
    }) else {
        return Vec::new();
    };
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|(name, r)| {
            let d = elpd_diff(r, &reports[best].1);
            ComparisonRow {
                model: name.clone(),
                elpd: r.elpd,
                waic: r.waic,
                elpd_diff: d.diff,
                se_diff: d.se,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.elpd_diff.total_cmp(&a.elpd_diff));
    rows
}
