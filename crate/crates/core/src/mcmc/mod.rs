//! Gibbs sampler with Metropolis correlation updates, chain orchestration
//! and draw storage.

pub mod chains;
pub mod config;
pub mod diagnostics;
pub mod draws;
pub mod dump;
pub mod model;
pub mod steps;
pub mod target;

pub use chains::{initial_state, run_chain, run_chains};
pub use config::SamplerConfig;
pub use diagnostics::{effective_sample_size, split_rhat};
pub use draws::{AcceptCount, ChainAcceptance, DrawLayout, PosteriorDraws};
pub use dump::{read_draws, write_draws};
pub use model::Model;
pub use steps::{logit_proposal, sample_inv_gamma, Sampler, StepSizes, SweepOutcome};
pub use target::{log_target_eta0, log_target_eta_s};
