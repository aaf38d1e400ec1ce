//! Posterior functionals, summaries and WAIC model comparison.

pub mod derived;
pub mod summary;
pub mod waic;

pub use derived::{aggregate, change, trend, trend_slope, AggregateDraws, AggregateGroup};
pub use summary::{quantile_sorted, summarize, Summary};
pub use waic::{compare, elpd_diff, pointwise_log_lik, waic, waic_from_draws, ComparisonRow, ElpdDiff, WaicReport};
