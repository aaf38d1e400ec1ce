//! Adjacency, prior and aggregate-group files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{link_islands, AreaGraph};
use crate::io::panel_csv::PanelLabels;
use crate::panel::PriorConfig;
use crate::posterior::AggregateGroup;

/// Result of reading an adjacency file.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: AreaGraph,
    /// 1-based links added to isolated areas.
    pub added: Vec<(usize, usize)>,
}

/// Edge list with one `a b` pair per line, labels matching the panel's
/// `area_id` values. Blank lines and `#` comments are skipped; commas
/// also separate fields.
pub fn parse_adjacency(text: &str, source: &str, labels: &PanelLabels, islands: bool) -> Result<LoadedGraph> {
    let mut edges = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: source.to_string(),
                line: k + 1,
                message: format!("expected two area ids, found {}", fields.len()),
            });
        }
        let pos = |f: &str| labels.area_position(f).map(|p| p + 1).ok_or_else(|| Error::UnknownArea(f.to_string()));
        edges.push((pos(fields[0])?, pos(fields[1])?));
    }
    let n = labels.areas.len();
    let (edges, added) = if islands { link_islands(n, &edges) } else { (edges, Vec::new()) };
    Ok(LoadedGraph {
        graph: AreaGraph::new(n, &edges)?,
        added,
    })
}

pub fn load_adjacency(path: &Path, labels: &PanelLabels, islands: bool) -> Result<LoadedGraph> {
    let text = std::fs::read_to_string(path)?;
    parse_adjacency(&text, &path.display().to_string(), labels, islands)
}

/// TOML prior overrides; absent keys keep their defaults.
pub fn parse_priors(text: &str, source: &str) -> Result<PriorConfig> {
    let priors: PriorConfig = toml::from_str(text).map_err(|e| Error::Parse {
        path: source.to_string(),
        line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
        message: e.message().to_string(),
    })?;
    priors.validate()?;
    Ok(priors)
}

pub fn load_priors(path: &Path) -> Result<PriorConfig> {
    parse_priors(&std::fs::read_to_string(path)?, &path.display().to_string())
}

/// CSV `group,area_id,area_size`, one row per member area.
pub fn read_aggregates(reader: impl std::io::Read, source: &str, labels: &PanelLabels) -> Result<Vec<AggregateGroup>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["group", "area_id", "area_size"] {
        return Err(Error::Parse {
            path: source.to_string(),
            line: 1,
            message: "header must be group,area_id,area_size".into(),
        });
    }
    let mut groups: Vec<AggregateGroup> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let size: f64 = record[2].parse().map_err(|_| Error::Parse {
            path: source.to_string(),
            line,
            message: format!("area_size: '{}' is not a number", &record[2]),
        })?;
        let area = labels.area_position(&record[1]).ok_or_else(|| Error::UnknownArea(record[1].to_string()))?;
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::NonPositiveArea { area: area + 1, value: size });
        }
        match groups.iter_mut().find(|g| g.name == record[0]) {
            Some(g) => g.members.push((area, size)),
            None => groups.push(AggregateGroup {
                name: record[0].to_string(),
                members: vec![(area, size)],
            }),
        }
    }
    Ok(groups)
}

pub fn load_aggregates(path: &Path, labels: &PanelLabels) -> Result<Vec<AggregateGroup>> {
    read_aggregates(std::fs::File::open(path)?, &path.display().to_string(), labels)
}
