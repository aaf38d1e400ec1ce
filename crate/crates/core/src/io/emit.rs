//! Result files written after a fit.
//!
//! Every file is a function of the draws, the panel and the options only,
//! so a reloaded draw dump reproduces them byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::io::panel_csv::{LoadedPanel, PanelLabels};
use crate::mcmc::{effective_sample_size, split_rhat, PosteriorDraws};
use crate::panel::Standardization;
use crate::posterior::{aggregate, change, summarize, trend, waic_from_draws, AggregateGroup, Summary, WaicReport};

#[derive(Debug, Clone, PartialEq)]
pub struct EmitOptions {
    pub level: f64,
    /// 0-based `(t1, t2)`; `None` means first to last time.
    pub change_pair: Option<(usize, usize)>,
    pub aggregates: Vec<AggregateGroup>,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            level: 0.95,
            change_pair: None,
            aggregates: Vec::new(),
        }
    }
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub command: String,
    pub model: String,
    pub seed: u64,
    pub config_hash: String,
    pub n_chains: usize,
    pub n_draws: usize,
    pub standardization: Vec<Standardization>,
    pub labels: PanelLabels,
    /// Links added to isolated areas, as area labels.
    pub linked_islands: Vec<(String, String)>,
    /// Post-burn-in acceptance rate of the intercept correlation step per chain.
    pub acceptance_eta0: Vec<f64>,
}

/// Hex SHA-256 of the JSON encoding of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn write_meta(out: &Path, record: &RunRecord) -> Result<PathBuf> {
    let path = out.join("meta.json");
    let mut text = serde_json::to_string_pretty(record)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn summary_fields(s: &Summary) -> [String; 6] {
    [
        fmt(s.mean),
        fmt(s.median),
        fmt(s.sd),
        fmt(s.lower),
        fmt(s.upper),
        s.excludes_zero.to_string(),
    ]
}

const SUMMARY_HEADER: [&str; 6] = ["mean", "median", "sd", "lower", "upper", "excludes_zero"];

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn header_with(prefix: &[&'static str], suffix: &[&'static str]) -> Vec<&'static str> {
    prefix.iter().chain(suffix).copied().collect()
}

/// Writes the deterministic summary file set into `out` and returns the
/// paths written.
pub fn emit_results(draws: &PosteriorDraws, panel: &LoadedPanel, options: &EmitOptions, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let labels = &panel.labels;
    let index = draws.index();
    let level = options.level;
    let mut written = Vec::new();

    let rows: Vec<Vec<String>> = (0..index.len())
        .map(|i| {
            let (a, t) = index.unflat(i);
            let c = &panel.table.cells()[i];
            let mut row = vec![
                labels.areas[a].clone(),
                labels.times[t].to_string(),
                c.n.to_string(),
                c.class.as_str().to_string(),
                opt(c.mu_hat),
                opt(c.sigma2_hat),
            ];
            row.extend(summary_fields(&summarize(&draws.mu(i), level)));
            row
        })
        .collect();
    let path = out.join("summary.csv");
    write_csv(&path, &header_with(&["area_id", "time", "n", "class", "mu_hat", "sigma2_hat"], &SUMMARY_HEADER), &rows)?;
    written.push(path);

    let names = draws.layout.names();
    let records = draws.records();
    let scalar = |name: &str| !["mu[", "eta0[", "eta_s[", "sigma2_cell["].iter().any(|p| name.starts_with(p));
    let rows: Vec<Vec<String>> = names
        .iter()
        .enumerate()
        .filter(|(_, n)| scalar(n))
        .map(|(k, name)| {
            let values: Vec<f64> = records.iter().map(|r| r[k]).collect();
            let mut by_chain = vec![Vec::new(); draws.n_chains];
            for (c, v) in draws.chain.iter().zip(&values) {
                by_chain[*c].push(*v);
            }
            let mut row = vec![name.clone()];
            row.extend(summary_fields(&summarize(&values, level)));
            row.push(fmt(split_rhat(&by_chain)));
            row.push(fmt(effective_sample_size(&by_chain)));
            row
        })
        .collect();
    let path = out.join("parameters.csv");
    write_csv(&path, &header_with(&["parameter"], &[&SUMMARY_HEADER[..], &["rhat", "ess"]].concat()), &rows)?;
    written.push(path);

    let trend_rows = (0..index.n_areas())
        .map(|a| {
            let mut row = vec![labels.areas[a].clone()];
            row.extend(summary_fields(&summarize(&trend(draws, a)?, level)));
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let path = out.join("trend.csv");
    write_csv(&path, &header_with(&["area_id"], &SUMMARY_HEADER), &trend_rows)?;
    written.push(path);

    let pair = options.change_pair.unwrap_or((0, index.n_times() - 1));
    let change_rows = if index.n_times() >= 2 {
        (0..index.n_areas())
            .map(|a| {
                let mut row = vec![
                    labels.areas[a].clone(),
                    labels.times[pair.0].to_string(),
                    labels.times[pair.1].to_string(),
                ];
                row.extend(summary_fields(&summarize(&change(draws, a, pair.0, pair.1)?, level)));
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let path = out.join("change.csv");
    write_csv(&path, &header_with(&["area_id", "time1", "time2"], &SUMMARY_HEADER), &change_rows)?;
    written.push(path);

    let mut agg_rows = Vec::new();
    for group in &options.aggregates {
        let pair = (index.n_times() >= 2).then_some(pair);
        let agg = aggregate(draws, group, pair)?;
        let mut push = |quantity: &str, time: String, values: &[f64]| {
            let mut row = vec![group.name.clone(), quantity.to_string(), time];
            row.extend(summary_fields(&summarize(values, level)));
            agg_rows.push(row);
        };
        for t in 0..index.n_times() {
            push("total", labels.times[t].to_string(), &agg.total[t]);
            push("density", labels.times[t].to_string(), &agg.density[t]);
        }
        push("trend", String::new(), &agg.trend);
        push("total_trend", String::new(), &agg.total_trend());
        if let (Some(c), Some(tc)) = (&agg.change, agg.total_change()) {
            push("change", String::new(), c);
            push("total_change", String::new(), &tc);
        }
    }
    let path = out.join("aggregates.csv");
    write_csv(&path, &header_with(&["group", "quantity", "time"], &SUMMARY_HEADER), &agg_rows)?;
    written.push(path);

    let report = waic_from_draws(draws, panel.table.cells())?;
    written.extend(write_waic(out, draws.layout.variant.as_str(), &report, labels, index)?);
    Ok(written)
}

fn write_waic(out: &Path, model: &str, report: &WaicReport, labels: &PanelLabels, index: crate::panel::PanelIndex) -> Result<Vec<PathBuf>> {
    let path = out.join("waic.csv");
    write_csv(
        &path,
        &["model", "n_cells", "lpd", "p_waic", "elpd", "waic", "elpd_se"],
        &[vec![
            model.to_string(),
            report.pointwise.len().to_string(),
            fmt(report.lpd),
            fmt(report.p_waic),
            fmt(report.elpd),
            fmt(report.waic),
            fmt(report.elpd_se),
        ]],
    )?;
    let pw_path = out.join("pointwise.csv");
    let rows: Vec<Vec<String>> = report
        .pointwise
        .iter()
        .map(|p| {
            let (a, t) = index.unflat(p.cell);
            vec![
                labels.areas[a].clone(),
                labels.times[t].to_string(),
                fmt(p.lpd),
                fmt(p.p_waic),
                fmt(p.elpd),
            ]
        })
        .collect();
    write_csv(&pw_path, &["area_id", "time", "lpd", "p_waic", "elpd"], &rows)?;
    Ok(vec![path, pw_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_content() {
        #[derive(Serialize)]
        struct C {
            a: f64,
            b: &'static str,
        }
        let h1 = config_hash(&C { a: 1.0, b: "x" }).unwrap();
        assert_eq!(h1.len(), 64);
        assert_eq!(h1, config_hash(&C { a: 1.0, b: "x" }).unwrap());
        assert_ne!(h1, config_hash(&C { a: 1.5, b: "x" }).unwrap());
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1e-300, 123456789.123, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
    }
}
