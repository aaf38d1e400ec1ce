use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use stfh::io::{
    config_hash, emit_results, load_adjacency, load_aggregates, load_panel_csv, load_priors, write_meta, EmitOptions,
    LoadedPanel, RunRecord,
};
use stfh::mcmc::{read_draws, write_draws};
use stfh::posterior::compare;
use stfh::{run_chains, Model, ModelSpec, PriorConfig, SamplerConfig, Variant};

use crate::{FitArgs, SummarizeArgs, SummaryArgs, WaicArgs};

fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Everything that changes the fitted output; paths enter by content.
#[derive(Serialize)]
struct HashedConfig<'a> {
    data: String,
    adjacency: Option<String>,
    aggregates: Option<String>,
    model: &'a str,
    svc: Vec<String>,
    priors: &'a PriorConfig,
    sampler: &'a SamplerConfig,
    level: f64,
    change: Option<(usize, usize)>,
    link_islands: bool,
    standardize: bool,
}

fn emit_options(args: &SummaryArgs, panel: &LoadedPanel) -> Result<EmitOptions> {
    let change_pair = match &args.change {
        None => None,
        Some(s) => {
            let parts: Vec<&str> = s.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                bail!("--change expects two time labels `t1,t2`, got '{s}'");
            }
            let pos = |p: &str| -> Result<usize> {
                let t: i64 = p.parse().with_context(|| format!("time label '{p}' is not an integer"))?;
                panel.labels.time_position(t).with_context(|| format!("time {t} is not in the panel"))
            };
            let (t1, t2) = (pos(parts[0])?, pos(parts[1])?);
            if t1 >= t2 {
                bail!("--change needs t1 before t2");
            }
            Some((t1, t2))
        }
    };
    if !(args.level > 0.0 && args.level < 1.0) {
        bail!("--level must lie in (0, 1)");
    }
    let aggregates = match &args.aggregates {
        Some(p) => load_aggregates(p, &panel.labels).with_context(|| format!("reading {}", p.display()))?,
        None => Vec::new(),
    };
    Ok(EmitOptions {
        level: args.level,
        change_pair,
        aggregates,
    })
}

pub fn run_fit(args: &FitArgs) -> Result<()> {
    let panel = load_panel_csv(&args.data, args.standardize).with_context(|| format!("reading {}", args.data.display()))?;
    let variant: Variant = args.model.parse()?;
    let names = &panel.covariates.names;
    let svc_names: Vec<String> = match (&args.svc_covariates, variant) {
        (Some(list), _) => list.clone(),
        (None, Variant::Full) => names.clone(),
        (None, _) => Vec::new(),
    };
    let svc = svc_names
        .iter()
        .map(|n| names.iter().position(|c| c == n).with_context(|| format!("unknown covariate '{n}'")))
        .collect::<Result<Vec<_>>>()?;
    let priors = match &args.priors {
        Some(p) => load_priors(p).with_context(|| format!("reading {}", p.display()))?,
        None => PriorConfig::default(),
    };
    let (graph, linked) = match (&args.adjacency, variant.is_spatial()) {
        (Some(p), true) => {
            let g = load_adjacency(p, &panel.labels, args.link_islands).with_context(|| format!("reading {}", p.display()))?;
            (Some(g.graph), g.added)
        }
        (None, true) => bail!("model {} needs --adjacency", variant.as_str()),
        (_, false) => (None, Vec::new()),
    };
    let sampler = SamplerConfig {
        n_chains: args.chains,
        iterations: args.iters,
        burn_in: args.burnin,
        thin: args.thin,
        seed: args.seed,
        ..Default::default()
    };
    sampler.validate()?;
    let options = emit_options(&args.summary, &panel)?;

    let hashed = HashedConfig {
        data: file_digest(&args.data)?,
        adjacency: match (&args.adjacency, variant.is_spatial()) {
            (Some(p), true) => Some(file_digest(p)?),
            _ => None,
        },
        aggregates: args.summary.aggregates.as_deref().map(file_digest).transpose()?,
        model: variant.as_str(),
        svc: svc_names.clone(),
        priors: &priors,
        sampler: &sampler,
        level: options.level,
        change: options.change_pair,
        link_islands: args.link_islands,
        standardize: args.standardize,
    };
    let hash = config_hash(&hashed)?;

    let spec = ModelSpec::new(variant, svc, priors.clone());
    let model = Model::new(panel.table.clone(), panel.covariates.clone(), graph, spec)?;
    let draws = run_chains(&model, &sampler)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    emit_results(&draws, &panel, &options, &args.out)?;
    if args.dump_draws {
        let f = fs::File::create(args.out.join("draws.bin"))?;
        let mut w = std::io::BufWriter::new(f);
        write_draws(&draws, &mut w)?;
    }
    let label = |i: usize| panel.labels.areas[i - 1].clone();
    let record = RunRecord {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: "fit".into(),
        model: variant.as_str().into(),
        seed: args.seed,
        config_hash: hash,
        n_chains: draws.n_chains,
        n_draws: draws.len(),
        standardization: panel.standardization.clone(),
        labels: panel.labels.clone(),
        linked_islands: linked.iter().map(|&(a, b)| (label(a), label(b))).collect(),
        acceptance_eta0: draws.acceptance.iter().map(|a| a.eta0.rate()).collect(),
    };
    write_meta(&args.out, &record)?;
    println!("{} draws from {} chains written to {}", draws.len(), draws.n_chains, args.out.display());
    Ok(())
}

pub fn run_summarize(args: &SummarizeArgs) -> Result<()> {
    let panel = load_panel_csv(&args.data, false).with_context(|| format!("reading {}", args.data.display()))?;
    let f = fs::File::open(&args.draws).with_context(|| format!("opening {}", args.draws.display()))?;
    let draws = read_draws(std::io::BufReader::new(f))?;
    if draws.index() != panel.index() {
        bail!("draws cover a different panel shape than {}", args.data.display());
    }
    if draws.layout.observed != panel.table.observed() {
        bail!("draws were fitted to a panel with different observed cells");
    }
    let options = emit_options(&args.summary, &panel)?;
    emit_results(&draws, &panel, &options, &args.out)?;
    println!("summaries of {} draws written to {}", draws.len(), args.out.display());
    Ok(())
}

pub fn run_waic(args: &WaicArgs) -> Result<()> {
    let mut keys = BTreeMap::new();
    let mut reports = Vec::new();
    for dir in &args.runs {
        let report = stfh::io::tables::load_pointwise(&dir.join("pointwise.csv"), &mut keys)
            .with_context(|| format!("reading WAIC of {}", dir.display()))?;
        let name = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
        reports.push((name, report));
    }
    let rows = compare(&reports);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "elpd", "waic", "elpd_diff", "se_diff"])?;
    for r in &rows {
        w.write_record([r.model.clone(), r.elpd.to_string(), r.waic.to_string(), r.elpd_diff.to_string(), r.se_diff.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    match &args.out {
        Some(p) => fs::write(p, &bytes)?,
        None => print!("{}", String::from_utf8(bytes)?),
    }
    Ok(())
}
