//! Log targets for the Metropolis updates of the correlation parameters.
//!
//! Both include the full Gaussian log-density terms (constants in the
//! correlation parameters are kept) plus the `log(x − a) + log(b − x)`
//! adjustment for a uniform prior mapped through the logit.

use crate::error::{Error, Result};
use crate::kernels::{block_ar1_logdet, block_ar1_quadform, Ar1Kernel, CarKernel, KroneckerKernel};
use crate::mcmc::model::Model;
use crate::panel::{Bounds, ParameterState};

pub fn uniform_log_jacobian(x: f64, bounds: Bounds) -> f64 {
    (x - bounds.lower).ln() + (bounds.upper - x).ln()
}

/// Log target for `(ρ, α)` of the intercept process.
///
/// `rho = None` selects the area-independent AR(1) intercept.
pub fn log_target_eta0(model: &Model, state: &ParameterState, rho: Option<f64>, alpha: f64) -> Result<f64> {
    let priors = &model.spec().priors;
    let index = model.index();
    let s2 = state.sigma2_eta0;
    let (log_det, quad) = match rho {
        Some(rho) => {
            let graph = model
                .graph()
                .ok_or_else(|| Error::InvalidSpec("spatial log target needs an adjacency graph".into()))?;
            let k = KroneckerKernel::new(CarKernel::new(graph), Ar1Kernel::new(index.n_times()));
            (k.log_det(s2, rho, alpha)?, k.quad_form(s2, rho, alpha, &state.eta0))
        }
        None => (
            block_ar1_logdet(index.n_areas(), index.n_times(), s2, alpha),
            block_ar1_quadform(index.n_times(), &state.eta0, s2, alpha),
        ),
    };
    let mut lp = -0.5 * log_det - 0.5 * quad + uniform_log_jacobian(alpha, priors.alpha);
    if let Some(rho) = rho {
        lp += uniform_log_jacobian(rho, priors.rho);
    }
    Ok(lp)
}

/// Log target for `ρ_{η^s_k}`.
pub fn log_target_eta_s(model: &Model, state: &ParameterState, k: usize, rho: f64) -> Result<f64> {
    let graph = model
        .graph()
        .ok_or_else(|| Error::InvalidSpec("space-varying terms need an adjacency graph".into()))?;
    let car = CarKernel::new(graph);
    let s2 = state.sigma2_eta_s[k];
    let log_det = graph.n_areas() as f64 * s2.ln() - car.log_det_precision(rho)?;
    let quad = car.quad_form(rho, &state.eta_s[k]) / s2;
    Ok(-0.5 * log_det - 0.5 * quad + uniform_log_jacobian(rho, model.spec().priors.rho))
}
