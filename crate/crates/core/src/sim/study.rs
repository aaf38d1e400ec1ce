//! Replicate loop: sample, estimate with the direct estimator and each
//! model, and score against the population truths.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::direct::{direct_change, direct_interval, direct_trend, normal_interval};
use crate::error::Result;
use crate::graph::AreaGraph;
use crate::mcmc::{run_chains, Model, PosteriorDraws, SamplerConfig};
use crate::panel::{Covariates, DirectTable, ModelSpec, PanelIndex, PriorConfig, Variant};
use crate::posterior::{change, summarize, trend, waic_from_draws, WaicReport};
use crate::rng::{substream, Purpose};
use crate::sim::population::Population;
use crate::sim::replicates::draw_replicate;
use crate::sim::scores::{score_estimators, Estimate, ReplicateScores};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub replicates: usize,
    pub models: Vec<Variant>,
    pub sampler: SamplerConfig,
    pub priors: PriorConfig,
    /// Interval level for every estimator.
    pub level: f64,
    pub seed: u64,
    pub standardize: bool,
    /// 0-based `(t1, t2)` for the change target; `None` means first to last.
    pub change_pair: Option<(usize, usize)>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            replicates: 25,
            models: vec![Variant::Full, Variant::Sub1, Variant::Sub2],
            sampler: SamplerConfig::default(),
            priors: PriorConfig::default(),
            level: 0.95,
            seed: 1,
            standardize: true,
            change_pair: None,
        }
    }
}

/// Model spec for `variant` with every covariate space-varying under FULL.
pub fn default_spec(variant: Variant, p: usize, priors: PriorConfig) -> ModelSpec {
    let svc = if variant == Variant::Full { (0..p).collect() } else { Vec::new() };
    ModelSpec::new(variant, svc, priors)
}

/// Posterior point estimates and intervals from one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub variant: Variant,
    pub mu: Vec<Estimate>,
    pub mu_sd: Vec<f64>,
    pub theta: Vec<Estimate>,
    pub theta_excludes_zero: Vec<bool>,
    pub delta: Vec<Estimate>,
    pub waic: WaicReport,
}

fn posterior_estimate(draws: &[f64], level: f64) -> (Estimate, f64, bool) {
    let s = summarize(draws, level);
    (
        Estimate {
            point: s.mean,
            interval: Some((s.lower, s.upper)),
        },
        s.sd,
        s.excludes_zero,
    )
}

/// Reduces posterior draws to per-target estimates.
pub fn summarize_fit(draws: &PosteriorDraws, table: &DirectTable, level: f64, change_pair: (usize, usize)) -> Result<ModelFit> {
    let index = draws.index();
    let (mut mu, mut mu_sd) = (Vec::with_capacity(index.len()), Vec::with_capacity(index.len()));
    for i in 0..index.len() {
        let (e, sd, _) = posterior_estimate(&draws.mu(i), level);
        mu.push(e);
        mu_sd.push(sd);
    }
    let (mut theta, mut theta_excludes_zero, mut delta) = (Vec::new(), Vec::new(), Vec::new());
    for a in 0..index.n_areas() {
        let (e, _, ex) = posterior_estimate(&trend(draws, a)?, level);
        theta.push(e);
        theta_excludes_zero.push(ex);
        delta.push(posterior_estimate(&change(draws, a, change_pair.0, change_pair.1)?, level).0);
    }
    Ok(ModelFit {
        variant: draws.layout.variant,
        mu,
        mu_sd,
        theta,
        theta_excludes_zero,
        delta,
        waic: waic_from_draws(draws, table.cells())?,
    })
}

/// Fits one model to a direct table and summarizes it.
pub fn fit_model(
    table: &DirectTable,
    covariates: &Covariates,
    graph: Option<&AreaGraph>,
    spec: ModelSpec,
    sampler: &SamplerConfig,
    level: f64,
    change_pair: (usize, usize),
) -> Result<ModelFit> {
    let graph = if spec.variant.is_spatial() { graph.cloned() } else { None };
    let model = Model::new(table.clone(), covariates.clone(), graph, spec)?;
    let draws = run_chains(&model, sampler)?;
    summarize_fit(&draws, table, level, change_pair)
}

/// Direct estimates for every cell, trend and change target.
pub fn direct_estimates(
    table: &DirectTable,
    level: f64,
    change_pair: (usize, usize),
) -> (Vec<Option<Estimate>>, Vec<Option<Estimate>>, Vec<Option<Estimate>>) {
    let index = table.index();
    let mu = table
        .cells()
        .iter()
        .map(|c| {
            c.mu_hat.map(|point| Estimate {
                point,
                interval: direct_interval(c, level),
            })
        })
        .collect();
    let to_estimate = |r: Option<(f64, Option<f64>)>| {
        r.map(|(point, var)| Estimate {
            point,
            interval: var.map(|v| normal_interval(point, v, level)),
        })
    };
    let theta = (0..index.n_areas())
        .map(|a| to_estimate(direct_trend(&table.cells()[index.area_range(a)])))
        .collect();
    let delta = (0..index.n_areas())
        .map(|a| to_estimate(direct_change(table.cell(a, change_pair.0), table.cell(a, change_pair.1))))
        .collect();
    (mu, theta, delta)
}

/// Skewed sample sizes in `0..=max_n`: each area draws a scale
/// `max_n · U²`, cells vary around it, and `empty_areas` get zero
/// everywhere.
pub fn synthetic_sample_sizes(index: PanelIndex, max_n: usize, empty_areas: &[usize], seed: u64) -> Vec<usize> {
    let mut rng = substream(seed, Purpose::Study, 0);
    let mut sizes = vec![0; index.len()];
    for a in 0..index.n_areas() {
        let u: f64 = rng.random();
        let scale = max_n as f64 * u * u;
        for t in 0..index.n_times() {
            let jitter: f64 = rng.random();
            let n = (scale * (0.6 + 0.8 * jitter)).round() as usize;
            if !empty_areas.contains(&a) {
                sizes[index.flat(a, t)] = n.min(max_n);
            }
        }
    }
    sizes
}

/// Estimates from one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFit {
    pub replicate: usize,
    pub table: DirectTable,
    pub models: Vec<ModelFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub sample_sizes: Vec<usize>,
    /// Estimator names, `direct` first then the models in config order.
    pub estimators: Vec<String>,
    pub mu: Vec<ReplicateScores>,
    pub theta: Vec<ReplicateScores>,
    pub delta: Vec<ReplicateScores>,
    /// `[replicate][model]`.
    pub waic: Vec<Vec<WaicReport>>,
}

pub fn run_replicate(
    population: &Population,
    sample_sizes: &[usize],
    config: &StudyConfig,
    covariates: &Covariates,
    graph: &AreaGraph,
    replicate: usize,
) -> Result<ReplicateFit> {
    let table = draw_replicate(population, sample_sizes, config.seed, replicate as u64)?;
    let sampler = SamplerConfig {
        seed: substream(config.seed, Purpose::Study, 1 + replicate as u64).random(),
        ..config.sampler.clone()
    };
    let pair = change_pair(config, population.index);
    let models = config
        .models
        .iter()
        .map(|&v| {
            let spec = default_spec(v, covariates.len(), config.priors.clone());
            fit_model(&table, covariates, Some(graph), spec, &sampler, config.level, pair)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicateFit { replicate, table, models })
}

fn change_pair(config: &StudyConfig, index: PanelIndex) -> (usize, usize) {
    config.change_pair.unwrap_or((0, index.n_times().saturating_sub(1)))
}

/// Runs every replicate in parallel and scores all estimators.
pub fn run_study(population: &Population, sample_sizes: &[usize], config: &StudyConfig) -> Result<StudyResult> {
    let mut covariates = population.area_covariate();
    if config.standardize {
        covariates.standardize();
    }
    let graph = population.area_graph()?;
    let fits = (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(population, sample_sizes, config, &covariates, &graph, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(score_study(population, sample_sizes, config, &fits))
}

/// Scores replicate fits against the population truths.
pub fn score_study(population: &Population, sample_sizes: &[usize], config: &StudyConfig, fits: &[ReplicateFit]) -> StudyResult {
    let pair = change_pair(config, population.index);
    let delta_true = population.delta_between(pair.0, pair.1);
    let direct: Vec<_> = fits.iter().map(|f| direct_estimates(&f.table, config.level, pair)).collect();
    let mut estimators = vec!["direct".to_string()];
    let mut mu = vec![score_estimators("direct", &population.mu_true, direct.iter().map(|d| d.0.clone()).collect())];
    let mut theta = vec![score_estimators("direct", &population.theta_true, direct.iter().map(|d| d.1.clone()).collect())];
    let mut delta = vec![score_estimators("direct", &delta_true, direct.iter().map(|d| d.2.clone()).collect())];
    for (m, variant) in config.models.iter().enumerate() {
        let name = variant.as_str();
        estimators.push(name.to_string());
        let wrap = |pick: fn(&ModelFit) -> &Vec<Estimate>| -> Vec<Vec<Option<Estimate>>> {
            fits.iter().map(|f| pick(&f.models[m]).iter().copied().map(Some).collect()).collect()
        };
        mu.push(score_estimators(name, &population.mu_true, wrap(|f| &f.mu)));
        theta.push(score_estimators(name, &population.theta_true, wrap(|f| &f.theta)));
        delta.push(score_estimators(name, &delta_true, wrap(|f| &f.delta)));
    }
    StudyResult {
        sample_sizes: sample_sizes.to_vec(),
        estimators,
        mu,
        theta,
        delta,
        waic: fits.iter().map(|f| f.models.iter().map(|m| m.waic.clone()).collect()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::population::{generate_population, AreaPartition, CovariateSurface, PopulationConfig};

    #[test]
    fn sample_size_design() {
        let idx = PanelIndex::new(10, 4).unwrap();
        let s = synthetic_sample_sizes(idx, 60, &[3], 7);
        assert!(s.iter().all(|&n| n <= 60));
        assert!(idx.area_range(3).all(|i| s[i] == 0));
        assert_eq!(s, synthetic_sample_sizes(idx, 60, &[3], 7));
    }

    #[test]
    fn tiny_study_runs() {
        let pop = generate_population(&PopulationConfig {
            grid: 6,
            partition: AreaPartition::Blocks { side: 2 },
            n_times: 3,
            sigma2_w: 1.0,
            sigma2_y: 4.0,
            covariate: CovariateSurface::Synthetic,
            ..Default::default()
        })
        .unwrap();
        let sizes = vec![3; pop.index.len()];
        let config = StudyConfig {
            replicates: 2,
            models: vec![Variant::Sub1, Variant::Sub2],
            sampler: SamplerConfig {
                n_chains: 1,
                iterations: 60,
                burn_in: 20,
                thin: 2,
                ..Default::default()
            },
            ..Default::default()
        };
        let r = run_study(&pop, &sizes, &config).unwrap();
        assert_eq!(r.estimators, vec!["direct", "sub1", "sub2"]);
        assert_eq!(r.mu.len(), 3);
        assert_eq!(r.waic.len(), 2);
        assert!(r.mu[1].scores.iter().all(|s| s.unwrap().n_points == 2));
        assert_eq!(r, run_study(&pop, &sizes, &config).unwrap());
    }
}
