use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod fit;
mod simulate;

#[derive(Parser)]
#[command(name = "stfh", version, about = "Spatio-temporal Fay-Herriot small area estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a panel of direct estimates and write summaries.
    Fit(FitArgs),
    /// Recompute summaries from a saved draw dump.
    Summarize(SummarizeArgs),
    /// Compare fitted runs by WAIC.
    Waic(WaicArgs),
    /// Generate a synthetic population and replicate samples, optionally
    /// fitting models to every replicate.
    Simulate(SimulateArgs),
    /// Score per-replicate estimates against truths.
    Score(ScoreArgs),
}

#[derive(Args, Clone)]
pub struct SummaryArgs {
    /// Aggregate groups: CSV `group,area_id,area_size`.
    #[arg(long)]
    pub aggregates: Option<PathBuf>,
    /// Time labels `t1,t2` for the change summary (default first,last).
    #[arg(long)]
    pub change: Option<String>,
    /// Credible interval level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Args)]
pub struct FitArgs {
    /// Panel CSV: area_id,time,n,mu_hat,sigma2_hat[,covariates].
    #[arg(long)]
    pub data: PathBuf,
    /// Edge list over area ids; required by full and sub1.
    #[arg(long)]
    pub adjacency: Option<PathBuf>,
    #[arg(long, default_value = "full")]
    pub model: String,
    /// Comma-separated covariate names with space-varying coefficients
    /// (default for full: every covariate).
    #[arg(long, value_delimiter = ',')]
    pub svc_covariates: Option<Vec<String>>,
    #[arg(long, default_value_t = 3)]
    pub chains: usize,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 2)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// TOML prior overrides.
    #[arg(long)]
    pub priors: Option<PathBuf>,
    #[command(flatten)]
    pub summary: SummaryArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Link each isolated area to its nearest id instead of failing.
    #[arg(long)]
    pub link_islands: bool,
    /// Center and scale covariates before fitting.
    #[arg(long)]
    pub standardize: bool,
    /// Also write the posterior draws to `draws.bin`.
    #[arg(long)]
    pub dump_draws: bool,
}

#[derive(Args)]
pub struct SummarizeArgs {
    /// Draw dump written by `fit --dump-draws`.
    #[arg(long)]
    pub draws: PathBuf,
    /// The panel CSV the draws were fitted to.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub summary: SummaryArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct WaicArgs {
    /// Output directories of `fit` runs.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Write the comparison table here as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 70)]
    pub grid: usize,
    /// Units per side of each square area.
    #[arg(long, default_value_t = 10)]
    pub area_side: usize,
    #[arg(long, default_value_t = 8)]
    pub times: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub sigma2_y: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sigma2_w: f64,
    #[arg(long, default_value_t = 0.003)]
    pub gamma: f64,
    /// Kilometres between neighbouring grid units.
    #[arg(long, default_value_t = 5.0)]
    pub cell_km: f64,
    #[arg(long, default_value_t = 25)]
    pub replicates: usize,
    /// Largest per-cell sample size.
    #[arg(long, default_value_t = 60)]
    pub max_n: usize,
    /// Area ids (1-based) that are never sampled.
    #[arg(long, value_delimiter = ',')]
    pub empty_areas: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Models to fit to every replicate, e.g. `full,sub1,sub2`.
    #[arg(long, value_delimiter = ',')]
    pub fit_models: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub chains: usize,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 2)]
    pub thin: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// CSV `target,truth`.
    #[arg(long)]
    pub truth: PathBuf,
    /// CSV `estimator,replicate,target,point,lower,upper`.
    #[arg(long)]
    pub estimates: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => fit::run_fit(&a),
        Command::Summarize(a) => fit::run_summarize(&a),
        Command::Waic(a) => fit::run_waic(&a),
        Command::Simulate(a) => simulate::run_simulate(&a),
        Command::Score(a) => simulate::run_score(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
