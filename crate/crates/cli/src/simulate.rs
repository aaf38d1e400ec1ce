use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};

use stfh::io::tables::{read_estimates, read_truths, write_estimates, write_scores, write_truths};
use stfh::io::{write_panel_csv, PanelLabels};
use stfh::sim::{
    draw_replicates, generate_population, run_study, score_estimators, synthetic_sample_sizes, AreaPartition, Estimate, PopulationConfig,
    StudyConfig,
};
use stfh::{PanelIndex, SamplerConfig, Variant};

use crate::{ScoreArgs, SimulateArgs};

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn cell_targets(index: PanelIndex) -> Vec<String> {
    (0..index.len())
        .map(|i| {
            let (a, t) = index.unflat(i);
            format!("mu[{},{}]", a + 1, t + 1)
        })
        .collect()
}

fn area_targets(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|a| format!("{prefix}[{a}]")).collect()
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let config = PopulationConfig {
        grid: args.grid,
        partition: AreaPartition::Blocks { side: args.area_side },
        n_times: args.times,
        sigma2_y: args.sigma2_y,
        sigma2_w: args.sigma2_w,
        gamma: args.gamma,
        cell_km: args.cell_km,
        seed: args.seed,
        ..Default::default()
    };
    let population = generate_population(&config)?;
    let index = population.index;
    let n_areas = index.n_areas();
    if let Some(&a) = args.empty_areas.iter().find(|&&a| a == 0 || a > n_areas) {
        bail!("empty area {a} outside 1..={n_areas}");
    }
    let empty: Vec<usize> = args.empty_areas.iter().map(|a| a - 1).collect();
    let sizes = synthetic_sample_sizes(index, args.max_n, &empty, args.seed);
    if let Some(i) = (0..index.len()).find(|&i| sizes[i] > population.units[index.unflat(i).0].len()) {
        bail!("cell {i} asks for more units than its area holds; lower --max-n");
    }

    let out = &args.out;
    fs::create_dir_all(out.join("replicates"))?;
    let labels = PanelLabels {
        areas: (1..=n_areas).map(|a| a.to_string()).collect(),
        times: (1..=index.n_times() as i64).collect(),
    };
    let mu_targets = cell_targets(index);
    let theta_targets = area_targets("theta", n_areas);
    let delta_targets = area_targets("delta", n_areas);
    write_truths(create(&out.join("truth_mu.csv"))?, &mu_targets, &population.mu_true)?;
    write_truths(create(&out.join("truth_theta.csv"))?, &theta_targets, &population.theta_true)?;
    write_truths(create(&out.join("truth_delta.csv"))?, &delta_targets, &population.delta_true)?;
    let adjacency: String = population.adjacency_edges().iter().map(|(a, b)| format!("{a} {b}\n")).collect();
    fs::write(out.join("adjacency.txt"), adjacency)?;

    let covariates = population.area_covariate();
    let tables = draw_replicates(&population, &sizes, args.replicates, args.seed)?;
    for (r, table) in tables.iter().enumerate() {
        write_panel_csv(create(&out.join(format!("replicates/replicate_{r:03}.csv")))?, table, &covariates, &labels)?;
    }

    if !args.fit_models.is_empty() {
        let models = args.fit_models.iter().map(|m| m.parse::<Variant>()).collect::<stfh::Result<Vec<_>>>()?;
        let study = StudyConfig {
            replicates: args.replicates,
            models,
            sampler: SamplerConfig {
                n_chains: args.chains,
                iterations: args.iters,
                burn_in: args.burnin,
                thin: args.thin,
                ..Default::default()
            },
            seed: args.seed,
            ..Default::default()
        };
        study.sampler.validate()?;
        let result = run_study(&population, &sizes, &study)?;
        for (name, scores, targets) in [
            ("mu", &result.mu, &mu_targets),
            ("theta", &result.theta, &theta_targets),
            ("delta", &result.delta, &delta_targets),
        ] {
            write_estimates(create(&out.join(format!("estimates_{name}.csv")))?, scores, targets)?;
            write_scores(create(&out.join(format!("scores_{name}.csv")))?, scores, targets)?;
        }
        let mut w = csv::Writer::from_writer(create(&out.join("waic.csv"))?);
        w.write_record(["replicate", "model", "elpd", "waic", "elpd_se"])?;
        for (r, reports) in result.waic.iter().enumerate() {
            for (m, rep) in reports.iter().enumerate() {
                w.write_record([r.to_string(), study.models[m].as_str().to_string(), rep.elpd.to_string(), rep.waic.to_string(), rep.elpd_se.to_string()])?;
            }
        }
        w.flush()?;
    }
    let mut w = csv::Writer::from_writer(create(&out.join("sample_sizes.csv"))?);
    w.write_record(["area_id", "time", "n"])?;
    for (i, n) in sizes.iter().enumerate() {
        let (a, t) = index.unflat(i);
        w.write_record([(a + 1).to_string(), (t + 1).to_string(), n.to_string()])?;
    }
    w.flush()?;
    println!("population of {} units in {} areas, {} replicates written to {}", config.n_units(), n_areas, args.replicates, out.display());
    Ok(())
}

pub fn run_score(args: &ScoreArgs) -> Result<()> {
    let truths = read_truths(fs::File::open(&args.truth)?, &args.truth.display().to_string())?;
    let rows = read_estimates(fs::File::open(&args.estimates)?, &args.estimates.display().to_string())?;
    let targets: Vec<String> = truths.iter().map(|t| t.0.clone()).collect();
    let values: Vec<f64> = truths.iter().map(|t| t.1).collect();
    let position: BTreeMap<&str, usize> = targets.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let mut by_estimator: BTreeMap<String, Vec<Vec<Option<Estimate>>>> = BTreeMap::new();
    let mut order = Vec::new();
    for row in &rows {
        let Some(&j) = position.get(row.target.as_str()) else {
            bail!("estimate for unknown target '{}'", row.target);
        };
        if !by_estimator.contains_key(&row.estimator) {
            order.push(row.estimator.clone());
        }
        let reps = by_estimator.entry(row.estimator.clone()).or_default();
        if reps.len() <= row.replicate {
            reps.resize(row.replicate + 1, vec![None; targets.len()]);
        }
        if reps[row.replicate][j].replace(row.estimate).is_some() {
            bail!("duplicate estimate for {} replicate {} target {}", row.estimator, row.replicate, row.target);
        }
    }
    let scores: Vec<_> = order
        .iter()
        .map(|name| score_estimators(name, &values, by_estimator.remove(name).expect("collected")))
        .collect();
    write_scores(create(&args.out)?, &scores, &targets)?;
    println!("scored {} estimators over {} targets", scores.len(), targets.len());
    Ok(())
}
