//! Synthetic unit-level population on a square grid.
//!
//! `y_t(ℓ) = ζ0 + u_t(ℓ) + ζ1 v_t(ℓ) + ε_t(ℓ)` with `u_0 = 0`,
//! `u_t = u_{t-1} + w_t`, `w_t` an exponential-covariance Gaussian process
//! and `ε_t` iid normal. Values are zeroed where `v = 0` or `y < 0`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::direct::direct_mean;
use crate::error::{Error, Result};
use crate::graph::AreaGraph;
use crate::panel::{Covariates, PanelIndex};
use crate::posterior::trend_slope;
use crate::rng::{substream, Purpose};

/// Largest population the dense GP factorization accepts.
pub const MAX_DENSE_UNITS: usize = 5000;

/// Assignment of grid units to areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AreaPartition {
    /// Square blocks of `side × side` units, numbered row-major.
    Blocks { side: usize },
    /// 0-based area id per unit, row-major over the grid.
    Explicit(Vec<usize>),
}

/// The covariate surface `v_t(ℓ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CovariateSurface {
    /// Smooth deterministic field in `[0, 100]` with a disc of zeros.
    Synthetic,
    Constant(f64),
    /// `[t][unit]` values, row-major units.
    Values(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    /// Units per grid side.
    pub grid: usize,
    pub partition: AreaPartition,
    pub n_times: usize,
    pub zeta0: f64,
    pub zeta1: f64,
    pub sigma2_y: f64,
    /// Variance of the GP increments `w_t`.
    pub sigma2_w: f64,
    /// Exponential decay per kilometre.
    pub gamma: f64,
    /// Distance between neighbouring units in kilometres; the GP sees
    /// `γ · cell_km` per grid step.
    pub cell_km: f64,
    pub covariate: CovariateSurface,
    /// `(area, slope)` pairs adding `slope · t` (0-based `t`) to every unit
    /// of the area before truncation.
    pub injected_trends: Vec<(usize, f64)>,
    pub seed: u64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            grid: 70,
            partition: AreaPartition::Blocks { side: 10 },
            n_times: 8,
            zeta0: 1.5,
            zeta1: 2.0,
            sigma2_y: 1000.0,
            sigma2_w: 10.0,
            gamma: 0.003,
            cell_km: 5.0,
            covariate: CovariateSurface::Synthetic,
            injected_trends: Vec::new(),
            seed: 1,
        }
    }
}

impl PopulationConfig {
    pub fn n_units(&self) -> usize {
        self.grid * self.grid
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.grid == 0 || self.n_times == 0 {
            return fail("grid and n_times must be positive".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma must be > 0 (got {})", self.gamma));
        }
        if !(self.cell_km > 0.0 && self.cell_km.is_finite()) {
            return fail(format!("cell_km must be > 0 (got {})", self.cell_km));
        }
        for (name, v) in [("sigma2_y", self.sigma2_y), ("sigma2_w", self.sigma2_w)] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(format!("{name} must be finite and >= 0 (got {v})"));
            }
        }
        if !(self.zeta0.is_finite() && self.zeta1.is_finite()) {
            return fail("zeta0 and zeta1 must be finite".into());
        }
        match &self.partition {
            AreaPartition::Blocks { side } => {
                if *side == 0 || self.grid % side != 0 {
                    return fail(format!("block side {side} does not divide grid {}", self.grid));
                }
            }
            AreaPartition::Explicit(ids) => {
                if ids.len() != self.n_units() {
                    return fail(format!("partition lists {} units, grid has {}", ids.len(), self.n_units()));
                }
                let n_areas = ids.iter().max().map_or(0, |m| m + 1);
                let used: BTreeSet<usize> = ids.iter().copied().collect();
                if used.len() != n_areas {
                    return fail("partition area ids must be contiguous from 0".into());
                }
            }
        }
        if let CovariateSurface::Values(v) = &self.covariate {
            if v.len() != self.n_times || v.iter().any(|row| row.len() != self.n_units()) {
                return fail("covariate values must be n_times rows of grid² units".into());
            }
        }
        Ok(())
    }

    /// Area id per unit.
    pub fn area_of_units(&self) -> Vec<usize> {
        match &self.partition {
            AreaPartition::Blocks { side } => {
                let per_row = self.grid / side;
                (0..self.n_units())
                    .map(|u| {
                        let (r, c) = (u / self.grid, u % self.grid);
                        (r / side) * per_row + c / side
                    })
                    .collect()
            }
            AreaPartition::Explicit(ids) => ids.clone(),
        }
    }
}

/// Smooth field in `[0, 100]` over unit coordinates in `[0, 1]²` with a
/// zero disc near `(0.8, 0.2)` and a mild drift over time.
pub fn synthetic_covariate(x: f64, y: f64, t: usize, n_times: usize) -> f64 {
    if (x - 0.8).powi(2) + (y - 0.2).powi(2) < 0.15 * 0.15 {
        return 0.0;
    }
    let pi = std::f64::consts::PI;
    let frac = if n_times > 1 { t as f64 / (n_times - 1) as f64 } else { 0.0 };
    let v = 50.0 + 30.0 * (2.0 * pi * x).sin() * (pi * y).cos() + 20.0 * (y - 0.5) + 4.0 * (frac - 0.5) * (pi * y).sin();
    v.clamp(0.0, 100.0)
}

#[derive(Debug, Clone)]
pub struct Population {
    pub config: PopulationConfig,
    pub index: PanelIndex,
    pub area_of: Vec<usize>,
    /// Units of each area in increasing order.
    pub units: Vec<Vec<usize>>,
    /// `[t][unit]`.
    pub y: Vec<Vec<f64>>,
    /// `[t][unit]`.
    pub v: Vec<Vec<f64>>,
    /// Within-area means of `y`, flat panel order.
    pub mu_true: Vec<f64>,
    pub theta_true: Vec<f64>,
    /// `μ_true` change from the first to the last time point.
    pub delta_true: Vec<f64>,
}

impl Population {
    pub fn n_areas(&self) -> usize {
        self.units.len()
    }

    pub fn unit_values(&self, area: usize, t: usize) -> Vec<f64> {
        self.units[area].iter().map(|&u| self.y[t][u]).collect()
    }

    /// `Δ_true` for 0-based `t1 < t2`.
    pub fn delta_between(&self, t1: usize, t2: usize) -> Vec<f64> {
        (0..self.n_areas())
            .map(|a| self.mu_true[self.index.flat(a, t2)] - self.mu_true[self.index.flat(a, t1)])
            .collect()
    }

    /// Area means of `v_t`, one flat-ordered column named `tcc`.
    pub fn area_covariate(&self) -> Covariates {
        let col = (0..self.index.len())
            .map(|i| {
                let (a, t) = self.index.unflat(i);
                let vals: Vec<f64> = self.units[a].iter().map(|&u| self.v[t][u]).collect();
                direct_mean(&vals).expect("areas are non-empty")
            })
            .collect();
        Covariates {
            names: vec!["tcc".into()],
            columns: vec![col],
        }
    }

    /// 1-based edges between areas owning rook-adjacent units.
    pub fn adjacency_edges(&self) -> Vec<(usize, usize)> {
        let g = self.config.grid;
        let mut edges = BTreeSet::new();
        for u in 0..g * g {
            let (r, c) = (u / g, u % g);
            let mut look = |w: usize| {
                let (a, b) = (self.area_of[u], self.area_of[w]);
                if a != b {
                    edges.insert((a.min(b) + 1, a.max(b) + 1));
                }
            };
            if c + 1 < g {
                look(u + 1);
            }
            if r + 1 < g {
                look(u + g);
            }
        }
        edges.into_iter().collect()
    }

    pub fn area_graph(&self) -> Result<AreaGraph> {
        AreaGraph::new(self.n_areas(), &self.adjacency_edges())
    }
}

fn gp_factor(grid: usize, sigma2_w: f64, decay: f64) -> Result<DMatrix<f64>> {
    let n = grid * grid;
    let cov = DMatrix::from_fn(n, n, |i, j| {
        let dx = (i % grid) as f64 - (j % grid) as f64;
        let dy = (i / grid) as f64 - (j / grid) as f64;
        sigma2_w * (-decay * (dx * dx + dy * dy).sqrt()).exp()
    });
    cov.cholesky()
        .map(|c| c.unpack())
        .ok_or_else(|| Error::NonPositiveDefinite("GP covariance".into()))
}

pub fn generate_population(config: &PopulationConfig) -> Result<Population> {
    config.validate()?;
    let n_units = config.n_units();
    if n_units > MAX_DENSE_UNITS {
        return Err(Error::TooManyUnits {
            units: n_units,
            max: MAX_DENSE_UNITS,
        });
    }
    let (g, nt) = (config.grid, config.n_times);
    let area_of = config.area_of_units();
    let n_areas = area_of.iter().max().map_or(0, |m| m + 1);
    let mut units = vec![Vec::new(); n_areas];
    for (u, &a) in area_of.iter().enumerate() {
        units[a].push(u);
    }
    for &(a, _) in &config.injected_trends {
        if a >= n_areas {
            return Err(Error::InvalidConfig(format!("injected trend for area {a} outside {n_areas} areas")));
        }
    }
    let index = PanelIndex::new(n_areas, nt)?;

    let v: Vec<Vec<f64>> = match &config.covariate {
        CovariateSurface::Synthetic => (0..nt)
            .map(|t| {
                (0..n_units)
                    .map(|u| {
                        let x = ((u % g) as f64 + 0.5) / g as f64;
                        let y = ((u / g) as f64 + 0.5) / g as f64;
                        synthetic_covariate(x, y, t, nt)
                    })
                    .collect()
            })
            .collect(),
        CovariateSurface::Constant(c) => vec![vec![*c; n_units]; nt],
        CovariateSurface::Values(vals) => vals.clone(),
    };

    let mut slope = vec![0.0; n_units];
    for &(a, s) in &config.injected_trends {
        for &u in &units[a] {
            slope[u] += s;
        }
    }

    let factor = if config.sigma2_w > 0.0 {
        Some(gp_factor(g, config.sigma2_w, config.gamma * config.cell_km)?)
    } else {
        None
    };
    let mut rng_w = substream(config.seed, Purpose::Population, 0);
    let mut rng_e = substream(config.seed, Purpose::Population, 1);
    let sd_y = config.sigma2_y.sqrt();
    let mut u_walk = DVector::<f64>::zeros(n_units);
    let mut y = Vec::with_capacity(nt);
    for t in 0..nt {
        if let Some(l) = &factor {
            let z = DVector::from_fn(n_units, |_, _| StandardNormal.sample(&mut rng_w));
            u_walk += l * z;
        }
        let row: Vec<f64> = (0..n_units)
            .map(|u| {
                let eps: f64 = StandardNormal.sample(&mut rng_e);
                let val = config.zeta0 + u_walk[u] + config.zeta1 * v[t][u] + sd_y * eps + slope[u] * t as f64;
                if v[t][u] == 0.0 || val < 0.0 {
                    0.0
                } else {
                    val
                }
            })
            .collect();
        y.push(row);
    }

    let mu_true: Vec<f64> = (0..index.len())
        .map(|i| {
            let (a, t) = index.unflat(i);
            let vals: Vec<f64> = units[a].iter().map(|&u| y[t][u]).collect();
            direct_mean(&vals).expect("areas are non-empty")
        })
        .collect();
    let theta_true = if nt >= 2 {
        (0..n_areas).map(|a| trend_slope(&mu_true[index.area_range(a)])).collect::<Result<Vec<_>>>()?
    } else {
        vec![0.0; n_areas]
    };
    let delta_true = (0..n_areas)
        .map(|a| mu_true[index.flat(a, nt - 1)] - mu_true[index.flat(a, 0)])
        .collect();

    Ok(Population {
        config: config.clone(),
        index,
        area_of,
        units,
        y,
        v,
        mu_true,
        theta_true,
        delta_true,
    })
}
