//! Trend, change and area-weighted aggregates, computed draw by draw.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::PosteriorDraws;
use crate::panel::PanelIndex;

/// Least-squares slope of `series` against `t = 1..T`.
pub fn trend_slope(series: &[f64]) -> Result<f64> {
    let t = series.len();
    if t < 2 {
        return Err(Error::DegenerateTime);
    }
    let t_bar = (t as f64 - 1.0) / 2.0;
    let mu_bar = series.iter().sum::<f64>() / t as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (s, y) in series.iter().enumerate() {
        let dt = s as f64 - t_bar;
        num += dt * (y - mu_bar);
        den += dt * dt;
    }
    Ok(num / den)
}

fn check_pair(index: PanelIndex, t1: usize, t2: usize) -> Result<()> {
    if t1 >= t2 || t2 >= index.n_times() {
        return Err(Error::BadTimePair {
            t1,
            t2,
            n_times: index.n_times(),
        });
    }
    Ok(())
}

/// `θ_j` per draw; rows of `mu` are full `μ` vectors.
pub fn trend_from_rows(mu: &[&[f64]], index: PanelIndex, area: usize) -> Result<Vec<f64>> {
    let range = index.area_range(area);
    mu.iter().map(|row| trend_slope(&row[range.clone()])).collect()
}

/// `Δ_j = μ_{j,t2} − μ_{j,t1}` per draw, 0-based times with `t1 < t2`.
pub fn change_from_rows(mu: &[&[f64]], index: PanelIndex, area: usize, t1: usize, t2: usize) -> Result<Vec<f64>> {
    check_pair(index, t1, t2)?;
    let (a, b) = (index.flat(area, t1), index.flat(area, t2));
    Ok(mu.iter().map(|row| row[b] - row[a]).collect())
}

pub fn trend(draws: &PosteriorDraws, area: usize) -> Result<Vec<f64>> {
    trend_from_rows(&draws.mu_rows(), draws.index(), area)
}

pub fn change(draws: &PosteriorDraws, area: usize, t1: usize, t2: usize) -> Result<Vec<f64>> {
    change_from_rows(&draws.mu_rows(), draws.index(), area, t1, t2)
}

/// A named union of areas with their sizes `A_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateGroup {
    pub name: String,
    /// `(area, A_j)` with 0-based area ids.
    pub members: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateDraws {
    pub name: String,
    pub total_area: f64,
    /// `Ω_{𝒥,t}` draws, indexed `[t][draw]`.
    pub total: Vec<Vec<f64>>,
    /// `μ_{𝒥,t} = Ω_{𝒥,t} / A_𝒥`, indexed `[t][draw]`.
    pub density: Vec<Vec<f64>>,
    pub trend: Vec<f64>,
    pub change: Option<Vec<f64>>,
}

impl AggregateDraws {
    pub fn total_trend(&self) -> Vec<f64> {
        self.trend.iter().map(|v| v * self.total_area).collect()
    }

    pub fn total_change(&self) -> Option<Vec<f64>> {
        self.change.as_ref().map(|c| c.iter().map(|v| v * self.total_area).collect())
    }
}

pub fn aggregate_from_rows(
    mu: &[&[f64]],
    index: PanelIndex,
    group: &AggregateGroup,
    change_pair: Option<(usize, usize)>,
) -> Result<AggregateDraws> {
    if group.members.is_empty() {
        return Err(Error::EmptyGroup(group.name.clone()));
    }
    for &(area, size) in &group.members {
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::NonPositiveArea { area, value: size });
        }
        if area >= index.n_areas() {
            return Err(Error::OutOfRangeCell {
                area: area + 1,
                time: 1,
                n_areas: index.n_areas(),
                n_times: index.n_times(),
            });
        }
    }
    if let Some((t1, t2)) = change_pair {
        check_pair(index, t1, t2)?;
    }
    let total_area: f64 = group.members.iter().map(|m| m.1).sum();
    let n_times = index.n_times();
    let total: Vec<Vec<f64>> = (0..n_times)
        .map(|t| {
            mu.iter()
                .map(|row| group.members.iter().map(|&(a, size)| size * row[index.flat(a, t)]).sum())
                .collect()
        })
        .collect();
    let density: Vec<Vec<f64>> = total.iter().map(|w| w.iter().map(|v| v / total_area).collect()).collect();
    let trend = (0..mu.len())
        .map(|l| {
            let series: Vec<f64> = density.iter().map(|d| d[l]).collect();
            trend_slope(&series)
        })
        .collect::<Result<Vec<_>>>()?;
    let change = change_pair.map(|(t1, t2)| density[t2].iter().zip(&density[t1]).map(|(b, a)| b - a).collect());
    Ok(AggregateDraws {
        name: group.name.clone(),
        total_area,
        total,
        density,
        trend,
        change,
    })
}

pub fn aggregate(draws: &PosteriorDraws, group: &AggregateGroup, change_pair: Option<(usize, usize)>) -> Result<AggregateDraws> {
    aggregate_from_rows(&draws.mu_rows(), draws.index(), group, change_pair)
}
