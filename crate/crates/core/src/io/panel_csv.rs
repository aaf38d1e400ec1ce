//! Panel CSV: `area_id,time,n,mu_hat,sigma2_hat[,covariate...]`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Cell, Covariates, DirectTable, PanelIndex, Standardization};

pub const REQUIRED_COLUMNS: [&str; 5] = ["area_id", "time", "n", "mu_hat", "sigma2_hat"];

/// External labels of the panel's areas and times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelLabels {
    /// Area labels in internal order.
    pub areas: Vec<String>,
    /// Time values in internal order, contiguous from the first.
    pub times: Vec<i64>,
}

impl PanelLabels {
    pub fn area_position(&self, label: &str) -> Option<usize> {
        self.areas.iter().position(|a| a == label)
    }

    pub fn time_position(&self, time: i64) -> Option<usize> {
        self.times.iter().position(|&t| t == time)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPanel {
    pub labels: PanelLabels,
    pub table: DirectTable,
    pub covariates: Covariates,
    /// Empty unless standardization was requested.
    pub standardization: Vec<Standardization>,
}

impl LoadedPanel {
    pub fn index(&self) -> PanelIndex {
        self.table.index()
    }
}

/// Distinct labels in order of first appearance.
pub fn order_labels(labels: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    labels.into_iter().filter(|l| seen.insert(l.clone())).collect()
}

struct Row {
    area: String,
    time: i64,
    n: usize,
    mu_hat: Option<f64>,
    sigma2_hat: Option<f64>,
    covariates: Vec<f64>,
    line: usize,
}

pub fn load_panel_csv(path: &Path, standardize: bool) -> Result<LoadedPanel> {
    let file = std::fs::File::open(path)?;
    read_panel_csv(file, &path.display().to_string(), standardize)
}

/// Parses a panel from any reader; `source` names it in errors.
///
/// Times span every integer from the smallest to the largest present.
/// Cells without a row are NO_PLOTS, which is only possible when the file
/// has no covariate columns.
pub fn read_panel_csv(reader: impl Read, source: &str, standardize: bool) -> Result<LoadedPanel> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < REQUIRED_COLUMNS.len() || header[..5] != REQUIRED_COLUMNS {
        return Err(parse_err(1, format!("header must start with {}", REQUIRED_COLUMNS.join(","))));
    }
    let cov_names = header[5..].to_vec();

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let opt_f64 = |k: usize| -> Result<Option<f64>> {
            let s = &record[k];
            if s.is_empty() {
                return Ok(None);
            }
            let v: f64 = s.parse().map_err(|_| parse_err(line, format!("{}: '{s}' is not a number", header[k])))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("{}: '{s}' is not finite", header[k])));
            }
            Ok(Some(v))
        };
        let area = record[0].to_string();
        if area.is_empty() {
            return Err(parse_err(line, "area_id is empty".into()));
        }
        let time: i64 = record[1]
            .parse()
            .map_err(|_| parse_err(line, format!("time: '{}' is not an integer", &record[1])))?;
        let n: usize = record[2]
            .parse()
            .map_err(|_| parse_err(line, format!("n: '{}' is not a non-negative integer", &record[2])))?;
        let mu_hat = opt_f64(3)?;
        let sigma2_hat = opt_f64(4)?;
        if sigma2_hat.is_some_and(|v| v < 0.0) {
            return Err(parse_err(line, "sigma2_hat must be >= 0".into()));
        }
        let mut covariates = Vec::with_capacity(cov_names.len());
        for k in 0..cov_names.len() {
            match opt_f64(5 + k)? {
                Some(v) => covariates.push(v),
                None => {
                    return Err(Error::MissingCovariate {
                        covariate: cov_names[k].clone(),
                        area,
                        time,
                    })
                }
            }
        }
        rows.push(Row {
            area,
            time,
            n,
            mu_hat,
            sigma2_hat,
            covariates,
            line,
        });
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }

    let areas = order_labels(rows.iter().map(|r| r.area.clone()));
    let t_min = rows.iter().map(|r| r.time).min().expect("non-empty");
    let t_max = rows.iter().map(|r| r.time).max().expect("non-empty");
    let times: Vec<i64> = (t_min..=t_max).collect();
    let area_pos: BTreeMap<&str, usize> = areas.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let index = PanelIndex::new(areas.len(), times.len())?;

    let mut cells = vec![Cell::empty(); index.len()];
    let mut seen = vec![false; index.len()];
    let mut columns = vec![vec![0.0; index.len()]; cov_names.len()];
    for r in &rows {
        let i = index.flat(area_pos[r.area.as_str()], (r.time - t_min) as usize);
        if seen[i] {
            return Err(Error::InconsistentPanel {
                area: r.area.clone(),
                time: r.time,
            });
        }
        seen[i] = true;
        cells[i] = Cell::new(r.n, r.mu_hat, r.sigma2_hat).map_err(|e| parse_err(r.line, e.to_string()))?;
        for (col, v) in columns.iter_mut().zip(&r.covariates) {
            col[i] = *v;
        }
    }
    if let (Some(name), Some(i)) = (cov_names.first(), seen.iter().position(|s| !s)) {
        let (a, t) = index.unflat(i);
        return Err(Error::MissingCovariate {
            covariate: name.clone(),
            area: areas[a].clone(),
            time: times[t],
        });
    }

    let mut covariates = Covariates::new(cov_names, columns)?;
    let standardization = if standardize { covariates.standardize() } else { Vec::new() };
    Ok(LoadedPanel {
        labels: PanelLabels { areas, times },
        table: DirectTable::new(index, cells)?,
        covariates,
        standardization,
    })
}

/// Writes a panel in the format `read_panel_csv` accepts, one row per cell.
pub fn write_panel_csv(writer: impl std::io::Write, table: &DirectTable, covariates: &Covariates, labels: &PanelLabels) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    header.extend(covariates.names.iter().map(String::as_str));
    w.write_record(&header)?;
    let index = table.index();
    for (i, c) in table.cells().iter().enumerate() {
        let (a, t) = index.unflat(i);
        let mut row = vec![
            labels.areas[a].clone(),
            labels.times[t].to_string(),
            c.n.to_string(),
            c.mu_hat.map(|v| v.to_string()).unwrap_or_default(),
            c.sigma2_hat.map(|v| v.to_string()).unwrap_or_default(),
        ];
        row.extend(covariates.columns.iter().map(|col| col[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
