//! File formats: panel and adjacency inputs, prior and aggregate
//! configuration, result tables and run records.

pub mod emit;
pub mod inputs;
pub mod panel_csv;
pub mod tables;

pub use emit::{config_hash, emit_results, write_meta, EmitOptions, RunRecord};
pub use inputs::{load_adjacency, load_aggregates, load_priors, parse_adjacency, parse_priors, read_aggregates, LoadedGraph};
pub use panel_csv::{load_panel_csv, read_panel_csv, write_panel_csv, LoadedPanel, PanelLabels};
