use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Initial random-walk scale on the logit of `(ρ, α)` for the intercept process.
    pub step_eta0: [f64; 2],
    /// Initial random-walk scale on the logit of each `ρ_{η^s_k}`.
    pub step_eta_s: f64,
    pub adapt_window: usize,
    pub target_acceptance: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_chains: 3,
            iterations: 5000,
            burn_in: 1000,
            thin: 2,
            seed: 1,
            step_eta0: [0.5, 0.5],
            step_eta_s: 0.5,
            adapt_window: 50,
            target_acceptance: 0.35,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.n_chains == 0 {
            return fail("n_chains must be at least 1".into());
        }
        if self.iterations <= self.burn_in {
            return fail(format!("iterations ({}) must exceed burn-in ({})", self.iterations, self.burn_in));
        }
        if self.thin == 0 {
            return fail("thin must be at least 1".into());
        }
        if (self.iterations - self.burn_in) % self.thin != 0 {
            return fail(format!(
                "iterations - burn-in ({}) must be a multiple of thin ({})",
                self.iterations - self.burn_in,
                self.thin
            ));
        }
        if self.adapt_window == 0 {
            return fail("adapt_window must be at least 1".into());
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return fail("target_acceptance must lie in (0, 1)".into());
        }
        if self.step_eta0.iter().chain([&self.step_eta_s]).any(|s| !(s.is_finite() && *s > 0.0)) {
            return fail("Metropolis step sizes must be positive".into());
        }
        Ok(())
    }

    pub fn draws_per_chain(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    pub fn total_draws(&self) -> usize {
        self.n_chains * self.draws_per_chain()
    }
}
