//! Simulation tables and WAIC reports read back from run directories.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::posterior::waic::PointwiseWaic;
use crate::posterior::WaicReport;
use crate::sim::{Estimate, ReplicateScores};

fn parse_err(source: &str, line: usize, message: String) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message,
    }
}

fn num(source: &str, line: usize, field: &str, s: &str) -> Result<f64> {
    s.parse().map_err(|_| parse_err(source, line, format!("{field}: '{s}' is not a number")))
}

fn opt_num(source: &str, line: usize, field: &str, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        num(source, line, field, s).map(Some)
    }
}

fn check_header(rdr: &mut csv::Reader<impl std::io::Read>, source: &str, want: &[&str]) -> Result<()> {
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != want {
        return Err(parse_err(source, 1, format!("header must be {}", want.join(","))));
    }
    Ok(())
}

/// Rebuilds a WAIC report from a `pointwise.csv`; `keys` assigns shared
/// cell ids to `(area_id, time)` pairs across files.
pub fn read_pointwise(reader: impl std::io::Read, source: &str, keys: &mut BTreeMap<(String, String), usize>) -> Result<WaicReport> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(&mut rdr, source, &["area_id", "time", "lpd", "p_waic", "elpd"])?;
    let mut pointwise = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let next = keys.len();
        let cell = *keys.entry((record[0].to_string(), record[1].to_string())).or_insert(next);
        pointwise.push(PointwiseWaic {
            cell,
            lpd: num(source, line, "lpd", &record[2])?,
            p_waic: num(source, line, "p_waic", &record[3])?,
            elpd: num(source, line, "elpd", &record[4])?,
        });
    }
    let lpd: f64 = pointwise.iter().map(|p| p.lpd).sum();
    let p_waic: f64 = pointwise.iter().map(|p| p.p_waic).sum();
    let n = pointwise.len() as f64;
    let mean = pointwise.iter().map(|p| p.elpd).sum::<f64>() / n;
    let var = if pointwise.len() > 1 {
        pointwise.iter().map(|p| (p.elpd - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(WaicReport {
        lpd,
        p_waic,
        elpd: lpd - p_waic,
        waic: -2.0 * (lpd - p_waic),
        elpd_se: (n * var).sqrt(),
        pointwise,
    })
}

pub fn load_pointwise(path: &Path, keys: &mut BTreeMap<(String, String), usize>) -> Result<WaicReport> {
    read_pointwise(std::fs::File::open(path)?, &path.display().to_string(), keys)
}

pub const ESTIMATE_HEADER: [&str; 6] = ["estimator", "replicate", "target", "point", "lower", "upper"];

/// Long-format estimates: one row per estimator, replicate and target.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub estimator: String,
    pub replicate: usize,
    pub target: String,
    pub estimate: Estimate,
}

pub fn write_estimates(writer: impl std::io::Write, scores: &[ReplicateScores], targets: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ESTIMATE_HEADER)?;
    for s in scores {
        for (r, row) in s.estimates.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let Some(e) = e else { continue };
                let (lo, hi) = e.interval.map_or((String::new(), String::new()), |(l, u)| (l.to_string(), u.to_string()));
                w.write_record([s.estimator.clone(), r.to_string(), targets[j].clone(), e.point.to_string(), lo, hi])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_estimates(reader: impl std::io::Read, source: &str) -> Result<Vec<EstimateRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(&mut rdr, source, &ESTIMATE_HEADER)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let replicate = record[1]
            .parse()
            .map_err(|_| parse_err(source, line, format!("replicate: '{}' is not an integer", &record[1])))?;
        let point = num(source, line, "point", &record[3])?;
        let interval = match (opt_num(source, line, "lower", &record[4])?, opt_num(source, line, "upper", &record[5])?) {
            (Some(l), Some(u)) => Some((l, u)),
            (None, None) => None,
            _ => return Err(parse_err(source, line, "lower and upper must both be present or both blank".into())),
        };
        out.push(EstimateRow {
            estimator: record[0].to_string(),
            replicate,
            target: record[2].to_string(),
            estimate: Estimate { point, interval },
        });
    }
    Ok(out)
}

/// `target,truth` rows.
pub fn write_truths(writer: impl std::io::Write, targets: &[String], truths: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["target", "truth"])?;
    for (t, v) in targets.iter().zip(truths) {
        w.write_record([t.clone(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truths(reader: impl std::io::Read, source: &str) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(&mut rdr, source, &["target", "truth"])?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        out.push((record[0].to_string(), num(source, line, "truth", &record[1])?));
    }
    Ok(out)
}

pub const SCORE_HEADER: [&str; 9] = ["estimator", "target", "truth", "n_points", "n_intervals", "bias", "rmse", "cover", "width"];

pub fn write_scores(writer: impl std::io::Write, scores: &[ReplicateScores], targets: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SCORE_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in scores {
        for (j, sc) in s.scores.iter().enumerate() {
            let Some(sc) = sc else { continue };
            w.write_record([
                s.estimator.clone(),
                targets[j].clone(),
                s.truths[j].to_string(),
                sc.n_points.to_string(),
                sc.n_intervals.to_string(),
                sc.bias.to_string(),
                sc.rmse.to_string(),
                opt(sc.cover),
                opt(sc.width),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::waic;
    use crate::sim::score_estimators;

    #[test]
    fn pointwise_round_trip() {
        let ll = vec![vec![-1.2, -0.3, -2.5], vec![-0.9, -0.7, -2.0], vec![-1.5, -0.2, -3.1]];
        let r = waic(&ll, &[0, 1, 2]).unwrap();
        let mut text = String::from("area_id,time,lpd,p_waic,elpd\n");
        for (p, key) in r.pointwise.iter().zip(["a,1", "a,2", "b,1"]) {
            text += &format!("{key},{},{},{}\n", p.lpd, p.p_waic, p.elpd);
        }
        let mut keys = BTreeMap::new();
        let back = read_pointwise(text.as_bytes(), "pw", &mut keys).unwrap();
        assert_eq!(back.pointwise, r.pointwise);
        assert!((back.waic - r.waic).abs() < 1e-12);
        assert!((back.elpd_se - r.elpd_se).abs() < 1e-12);
    }

    #[test]
    fn estimates_round_trip() {
        let est = vec![
            vec![Some(Estimate { point: 1.5, interval: Some((1.0, 2.0)) }), None],
            vec![Some(Estimate { point: 0.25, interval: None }), Some(Estimate { point: 3.0, interval: Some((2.0, 4.5)) })],
        ];
        let s = score_estimators("direct", &[1.0, 3.0], est);
        let targets = vec!["mu[1,1]".to_string(), "mu[1,2]".to_string()];
        let mut buf = Vec::new();
        write_estimates(&mut buf, &[s], &targets).unwrap();
        let rows = read_estimates(buf.as_slice(), "e").unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].estimate.interval, None);
        assert_eq!(rows[2].target, "mu[1,2]");
        assert!(read_estimates("estimator,replicate,target,point,lower,upper\nd,0,x,1,2,\n".as_bytes(), "e").is_err());
    }
}
