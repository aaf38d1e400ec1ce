//! Simulation study: synthetic populations, replicate samples and
//! estimator scoring.

pub mod population;
pub mod replicates;
pub mod scores;
pub mod study;

pub use population::{generate_population, AreaPartition, CovariateSurface, Population, PopulationConfig};
pub use replicates::{draw_replicate, draw_replicates};
pub use scores::{score_estimators, score_target, Estimate, ReplicateScores, TargetScores};
pub use study::{run_study, synthetic_sample_sizes, ModelFit, StudyConfig, StudyResult};
