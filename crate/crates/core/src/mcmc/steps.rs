//! One Gibbs sweep: the eleven full-conditional updates in order.
//!
//! Multivariate normal steps take their standard normal noise explicitly
//! (`draw_*`), so zero noise yields the conditional mean; the `update_*`
//! wrappers pull noise from the chain's generator.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{sample_mvn_canonical, Ar1Kernel, CarKernel, EnvelopeCholesky, KroneckerKernel};
use crate::kernels::kron::block_ar1_quadform;
use crate::mcmc::model::Model;
use crate::mcmc::target::{log_target_eta0, log_target_eta_s};
use crate::panel::{Bounds, ParameterState};

/// Proposals closer than this to a uniform bound are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-8;

/// Random-walk scales on the logit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    /// `[ρ, α]` for the intercept process.
    pub eta0: [f64; 2],
    pub eta_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOutcome {
    pub eta0_accepted: bool,
    pub eta_s_accepted: Vec<bool>,
}

/// Inverse-gamma draw as the reciprocal of a `Gamma(a, 1/b)` draw.
pub fn sample_inv_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    let g: f64 = Gamma::new(shape, 1.0).expect("positive IG shape").sample(rng);
    scale / g
}

fn normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Maps `x ∈ (a, b)` through the logit, steps by `step·z`, and maps back.
/// Returns `None` when the proposal falls within the boundary margin.
pub fn logit_proposal(x: f64, bounds: Bounds, step: f64, z: f64) -> Option<f64> {
    let width = bounds.upper - bounds.lower;
    let u = (x - bounds.lower) / width;
    let logit = (u / (1.0 - u)).ln() + step * z;
    let proposed = bounds.lower + width / (1.0 + (-logit).exp());
    (proposed > bounds.lower + BOUNDARY_MARGIN && proposed < bounds.upper - BOUNDARY_MARGIN).then_some(proposed)
}

pub struct Sampler<'m> {
    model: &'m Model,
    beta_factor: EnvelopeCholesky,
    eta0_factor: EnvelopeCholesky,
    eta_s_factor: Option<EnvelopeCholesky>,
    pub steps: StepSizes,
}

impl<'m> Sampler<'m> {
    pub fn new(model: &'m Model, steps: StepSizes) -> Self {
        Self {
            model,
            beta_factor: EnvelopeCholesky::dense(model.p() + 1),
            eta0_factor: model.eta0_layout().clone(),
            eta_s_factor: model.eta_s_layout().cloned(),
            steps,
        }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    /// Steps 1 to 11 in order.
    pub fn sweep<R: Rng + ?Sized>(&mut self, state: &mut ParameterState, rng: &mut R) -> Result<SweepOutcome> {
        self.update_mu_observed(state, rng);
        self.update_mu_missing(state, rng);
        self.update_beta(state, rng)?;
        self.update_eta0(state, rng)?;
        for k in 0..self.model.q() {
            self.update_eta_s(state, k, rng)?;
        }
        self.update_sigma2_cell(state, rng);
        self.update_sigma2_eta0(state, rng);
        for k in 0..self.model.q() {
            self.update_sigma2_eta_s(state, k, rng);
        }
        self.update_sigma2_eps(state, rng);
        let eta0_accepted = self.metropolis_eta0(state, rng)?;
        let eta_s_accepted = (0..self.model.q())
            .map(|k| self.metropolis_eta_s(state, k, rng))
            .collect::<Result<_>>()?;
        Ok(SweepOutcome {
            eta0_accepted,
            eta_s_accepted,
        })
    }

    fn mean_of(&self, state: &ParameterState, i: usize) -> f64 {
        state.eta0[i] + self.model.fixed_effect(&state.beta, i) + self.model.svc_effect(&state.eta_s, i, None)
    }

    /// Conditional mean and variance of an OBSERVED `μ_i` (Step 1).
    pub fn mu_observed_conditional(&self, state: &ParameterState, i: usize) -> (f64, f64) {
        let cell = &self.model.cells()[i];
        let s2 = state.sigma2_cell[i].expect("observed cells carry a sampling variance");
        let mu_hat = cell.mu_hat.expect("observed cells carry a direct mean");
        let var = 1.0 / (1.0 / s2 + 1.0 / state.sigma2_eps);
        (var * (mu_hat / s2 + self.mean_of(state, i) / state.sigma2_eps), var)
    }

    pub fn update_mu_observed<R: Rng + ?Sized>(&self, state: &mut ParameterState, rng: &mut R) {
        for &i in self.model.observed() {
            let (mean, var) = self.mu_observed_conditional(state, i);
            let z: f64 = rng.sample(StandardNormal);
            state.mu[i] = mean + var.sqrt() * z;
        }
    }

    /// Step 2: posterior-predictive draw for every non-OBSERVED cell.
    pub fn update_mu_missing<R: Rng + ?Sized>(&self, state: &mut ParameterState, rng: &mut R) {
        let sd = state.sigma2_eps.sqrt();
        for (i, cell) in self.model.cells().iter().enumerate() {
            if !cell.is_observed() {
                let z: f64 = rng.sample(StandardNormal);
                state.mu[i] = self.mean_of(state, i) + sd * z;
            }
        }
    }

    /// Step 3 with caller-supplied noise of length `p + 1`.
    pub fn draw_beta(&mut self, state: &mut ParameterState, noise: &[f64]) -> Result<()> {
        let model = self.model;
        let priors = &model.spec().priors;
        let np = model.p() + 1;
        let f = &mut self.beta_factor;
        f.clear();
        for a in 0..np {
            f.add(a, a, 1.0 / priors.sigma2_beta);
            for b in 0..=a {
                f.add(a, b, model.xtx(a, b) / state.sigma2_eps);
            }
        }
        f.factorize()?;
        let mut v = vec![priors.mu_beta / priors.sigma2_beta; np];
        for i in 0..model.index().len() {
            let r = (state.mu[i] - state.eta0[i] - model.svc_effect(&state.eta_s, i, None)) / state.sigma2_eps;
            for (va, x) in v.iter_mut().zip(model.design_row(i)) {
                *va += x * r;
            }
        }
        state.beta = sample_mvn_canonical(f, &v, noise);
        Ok(())
    }

    pub fn update_beta<R: Rng + ?Sized>(&mut self, state: &mut ParameterState, rng: &mut R) -> Result<()> {
        let z = normals(rng, self.model.p() + 1);
        self.draw_beta(state, &z)
    }

    /// Step 4 with caller-supplied noise of length `N`.
    ///
    /// The prior precision is `σ^{-2}(D − ρW) ⊗ A^{-1}` for spatial
    /// variants and `σ^{-2} I ⊗ A^{-1}` otherwise.
    pub fn draw_eta0(&mut self, state: &mut ParameterState, noise: &[f64]) -> Result<()> {
        let model = self.model;
        let index = model.index();
        let t = index.n_times();
        let ar1 = Ar1Kernel::new(t);
        let alpha = state.alpha_eta0;
        let inv_s2 = 1.0 / state.sigma2_eta0;
        let inv_eps = 1.0 / state.sigma2_eps;
        let f = &mut self.eta0_factor;
        f.clear();
        for a in 0..index.n_areas() {
            let scale = match state.rho_eta0 {
                Some(_) => model.spatial_graph().degrees()[a] * inv_s2,
                None => inv_s2,
            };
            for s in 0..t {
                let i = a * t + s;
                f.add(i, i, scale * ar1.precision_entry(alpha, s, s) + inv_eps);
                if s + 1 < t {
                    f.add(i, i + 1, scale * ar1.precision_entry(alpha, s, s + 1));
                }
            }
        }
        if let Some(rho) = state.rho_eta0 {
            for (a, b) in model.spatial_graph().edges() {
                for s in 0..t {
                    for r in s.saturating_sub(1)..(s + 2).min(t) {
                        f.add(a * t + s, b * t + r, -rho * inv_s2 * ar1.precision_entry(alpha, s, r));
                    }
                }
            }
        }
        f.factorize()?;
        let v: Vec<f64> = (0..index.len())
            .map(|i| {
                (state.mu[i] - model.fixed_effect(&state.beta, i) - model.svc_effect(&state.eta_s, i, None)) * inv_eps
            })
            .collect();
        state.eta0 = sample_mvn_canonical(f, &v, noise);
        Ok(())
    }

    pub fn update_eta0<R: Rng + ?Sized>(&mut self, state: &mut ParameterState, rng: &mut R) -> Result<()> {
        let z = normals(rng, self.model.index().len());
        self.draw_eta0(state, &z)
    }

    /// Step 5 for term `k` with caller-supplied noise of length `J`.
    pub fn draw_eta_s(&mut self, state: &mut ParameterState, k: usize, noise: &[f64]) -> Result<()> {
        let model = self.model;
        let graph = model.spatial_graph();
        let index = model.index();
        let t = index.n_times();
        let rho = state.rho_eta_s[k];
        let inv_s2 = 1.0 / state.sigma2_eta_s[k];
        let inv_eps = 1.0 / state.sigma2_eps;
        let f = self
            .eta_s_factor
            .as_mut()
            .ok_or_else(|| Error::InvalidSpec("space-varying update outside the full model".into()))?;
        f.clear();
        let sq = model.svc_square_sums(k);
        for a in 0..index.n_areas() {
            f.add(a, a, graph.degrees()[a] * inv_s2 + sq[a] * inv_eps);
        }
        for (a, b) in graph.edges() {
            f.add(a, b, -rho * inv_s2);
        }
        f.factorize()?;
        let x = model.svc_column(k);
        let v: Vec<f64> = (0..index.n_areas())
            .map(|a| {
                (a * t..(a + 1) * t)
                    .map(|i| {
                        let r = state.mu[i]
                            - state.eta0[i]
                            - model.fixed_effect(&state.beta, i)
                            - model.svc_effect(&state.eta_s, i, Some(k));
                        x[i] * r
                    })
                    .sum::<f64>()
                    * inv_eps
            })
            .collect();
        state.eta_s[k] = sample_mvn_canonical(f, &v, noise);
        Ok(())
    }

    pub fn update_eta_s<R: Rng + ?Sized>(&mut self, state: &mut ParameterState, k: usize, rng: &mut R) -> Result<()> {
        let z = normals(rng, self.model.index().n_areas());
        self.draw_eta_s(state, k, &z)
    }

    /// Step 6 inverse-gamma `(a, b)` for an OBSERVED cell.
    pub fn sigma2_cell_conditional(&self, state: &ParameterState, i: usize) -> (f64, f64) {
        let cell = &self.model.cells()[i];
        let n = cell.n as f64;
        let s2_hat = cell.sigma2_hat.expect("observed cells carry a direct variance");
        let mu_hat = cell.mu_hat.expect("observed cells carry a direct mean");
        (n / 2.0 + 0.5, (n - 1.0) * s2_hat / 2.0 + (mu_hat - state.mu[i]).powi(2) / 2.0)
    }

    pub fn update_sigma2_cell<R: Rng + ?Sized>(&self, state: &mut ParameterState, rng: &mut R) {
        for &i in self.model.observed() {
            let (a, b) = self.sigma2_cell_conditional(state, i);
            state.sigma2_cell[i] = Some(sample_inv_gamma(rng, a, b));
        }
    }

    /// Step 7 inverse-gamma `(a, b)`.
    pub fn sigma2_eta0_conditional(&self, state: &ParameterState) -> (f64, f64) {
        let index = self.model.index();
        let priors = &self.model.spec().priors;
        let quad = match state.rho_eta0 {
            Some(rho) => KroneckerKernel::new(CarKernel::new(self.model.spatial_graph()), Ar1Kernel::new(index.n_times()))
                .quad_form(1.0, rho, state.alpha_eta0, &state.eta0),
            None => block_ar1_quadform(index.n_times(), &state.eta0, 1.0, state.alpha_eta0),
        };
        (priors.shape + index.len() as f64 / 2.0, priors.b_eta0 + quad / 2.0)
    }

    pub fn update_sigma2_eta0<R: Rng + ?Sized>(&self, state: &mut ParameterState, rng: &mut R) {
        let (a, b) = self.sigma2_eta0_conditional(state);
        state.sigma2_eta0 = sample_inv_gamma(rng, a, b);
    }

    /// Step 8 inverse-gamma `(a, b)` for term `k`.
    pub fn sigma2_eta_s_conditional(&self, state: &ParameterState, k: usize) -> (f64, f64) {
        let graph = self.model.spatial_graph();
        let priors = &self.model.spec().priors;
        let quad = CarKernel::new(graph).quad_form(state.rho_eta_s[k], &state.eta_s[k]);
        (priors.shape + graph.n_areas() as f64 / 2.0, priors.b_eta_s + quad / 2.0)
    }

    pub fn update_sigma2_eta_s<R: Rng + ?Sized>(&self, state: &mut ParameterState, k: usize, rng: &mut R) {
        let (a, b) = self.sigma2_eta_s_conditional(state, k);
        state.sigma2_eta_s[k] = sample_inv_gamma(rng, a, b);
    }

    /// Step 9 inverse-gamma `(a, b)` from the residual `μ − η0 − Xβ − X̃Zη^s`.
    pub fn sigma2_eps_conditional(&self, state: &ParameterState) -> (f64, f64) {
        let priors = &self.model.spec().priors;
        let n = self.model.index().len();
        let rss: f64 = (0..n).map(|i| (state.mu[i] - self.mean_of(state, i)).powi(2)).sum();
        (priors.shape + n as f64 / 2.0, priors.b_eps + rss / 2.0)
    }

    pub fn update_sigma2_eps<R: Rng + ?Sized>(&self, state: &mut ParameterState, rng: &mut R) {
        let (a, b) = self.sigma2_eps_conditional(state);
        state.sigma2_eps = sample_inv_gamma(rng, a, b);
    }

    /// Step 10: joint random-walk Metropolis on `(ρ, α)` of the intercept
    /// process (`α` alone without a spatial term).
    pub fn metropolis_eta0<R: Rng + ?Sized>(&mut self, state: &mut ParameterState, rng: &mut R) -> Result<bool> {
        let priors = &self.model.spec().priors;
        let z: [f64; 2] = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let log_u = rng.random::<f64>().ln();
        let alpha = logit_proposal(state.alpha_eta0, priors.alpha, self.steps.eta0[1], z[1]);
        let rho = match state.rho_eta0 {
            Some(r) => logit_proposal(r, priors.rho, self.steps.eta0[0], z[0]).map(Some),
            None => Some(None),
        };
        let (Some(alpha), Some(rho)) = (alpha, rho) else {
            return Ok(false);
        };
        let current = log_target_eta0(self.model, state, state.rho_eta0, state.alpha_eta0)?;
        let proposed = log_target_eta0(self.model, state, rho, alpha)?;
        if log_u < proposed - current {
            state.rho_eta0 = rho;
            state.alpha_eta0 = alpha;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Step 11: random-walk Metropolis on `ρ_{η^s_k}`.
    pub fn metropolis_eta_s<R: Rng + ?Sized>(&mut self, state: &mut ParameterState, k: usize, rng: &mut R) -> Result<bool> {
        let priors = &self.model.spec().priors;
        let z: f64 = rng.sample(StandardNormal);
        let log_u = rng.random::<f64>().ln();
        let Some(rho) = logit_proposal(state.rho_eta_s[k], priors.rho, self.steps.eta_s[k], z) else {
            return Ok(false);
        };
        let current = log_target_eta_s(self.model, state, k, state.rho_eta_s[k])?;
        let proposed = log_target_eta_s(self.model, state, k, rho)?;
        if log_u < proposed - current {
            state.rho_eta_s[k] = rho;
            Ok(true)
        } else {
            Ok(false)
        }
    }
}
