use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("area {node} has no neighbours (every area needs at least one)")]
    IsolatedNode { node: usize },

    #[error("edge ({0}, {1}) references an area outside 1..={2}")]
    EdgeOutOfRange(usize, usize, usize),

    #[error("self-loop on area {0}")]
    SelfLoop(usize),

    #[error("cell (area {area}, time {time}) is outside the {n_areas}x{n_times} panel")]
    OutOfRangeCell {
        area: usize,
        time: usize,
        n_areas: usize,
        n_times: usize,
    },

    #[error("precision is not positive definite: {0}")]
    NonPositiveDefinite(String),

    #[error("Cholesky factorization failed at pivot {pivot} (value {value:e})")]
    CholeskyFailure { pivot: usize, value: f64 },

    #[error("trend needs at least two time points")]
    DegenerateTime,

    #[error("invalid time pair ({t1}, {t2}) for a series of length {n_times}")]
    BadTimePair { t1: usize, t2: usize, n_times: usize },

    #[error("aggregate group '{0}' has no members")]
    EmptyGroup(String),

    #[error("area {area} has non-positive size {value}")]
    NonPositiveArea { area: usize, value: f64 },

    #[error("non-finite log-likelihood at draw {draw}, cell {cell}")]
    NonFiniteLogLik { draw: usize, cell: usize },

    #[error("population has {units} units; dense generation supports at most {max}")]
    TooManyUnits { units: usize, max: usize },

    #[error("cell (area {area}, time {time}) requests {requested} units but the area has {available}")]
    SampleExceedsPopulation {
        area: usize,
        time: usize,
        requested: usize,
        available: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate row for area '{area}', time {time}")]
    InconsistentPanel { area: String, time: i64 },

    #[error("covariate '{covariate}' missing for area '{area}', time {time}")]
    MissingCovariate {
        covariate: String,
        area: String,
        time: i64,
    },

    #[error("unknown area label '{0}'")]
    UnknownArea(String),

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("chain {chain}, iteration {iteration}: {source}")]
    Sampler {
        chain: usize,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed draw dump: {0}")]
    BadDump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
