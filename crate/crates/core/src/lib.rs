//! Spatio-temporal Fay-Herriot small area estimation.
//!
//! Direct survey estimates on an area-by-time panel are smoothed with a
//! hierarchical model whose random effects carry a separable CAR ⊗ AR(1)
//! covariance, fitted by Gibbs sampling with Metropolis steps for the
//! correlation parameters.

pub mod direct;
pub mod error;
pub mod graph;
pub mod io;
pub mod kernels;
pub mod mcmc;
pub mod panel;
pub mod posterior;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use graph::AreaGraph;
pub use panel::{Cell, Covariates, DirectTable, MissClass, ModelSpec, PanelIndex, ParameterState, PriorConfig, Variant};
pub use mcmc::{run_chains, Model, PosteriorDraws, SamplerConfig};
