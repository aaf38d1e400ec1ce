use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::EnvelopeCholesky;
use crate::mcmc::config::SamplerConfig;
use crate::mcmc::draws::{AcceptCount, ChainAcceptance, DrawLayout, PosteriorDraws};
use crate::mcmc::model::Model;
use crate::mcmc::steps::{Sampler, StepSizes};
use crate::panel::{validate_state, Bounds, ParameterState};
use crate::rng::{substream, Purpose};

fn prior_mean(shape: f64, scale: f64) -> f64 {
    if shape > 1.0 {
        scale / (shape - 1.0)
    } else {
        scale
    }
}

fn midpoint(b: Bounds) -> f64 {
    0.5 * (b.lower + b.upper)
}

/// Starting state shared by all chains before jitter.
///
/// `β` is the prior-regularized least-squares fit to the observed direct
/// means, `μ` sits at `μ̂` where observed and at `Xβ` elsewhere, random
/// effects are zero, `σ²_{j,t}` starts at `σ̂²`, other variances at their
/// prior means and correlations at the middle of their bounds.
pub fn initial_state(model: &Model) -> Result<ParameterState> {
    let priors = &model.spec().priors;
    let index = model.index();
    let (n, j, q, np) = (index.len(), index.n_areas(), model.q(), model.p() + 1);

    let mut f = EnvelopeCholesky::dense(np);
    let mut v = vec![priors.mu_beta / priors.sigma2_beta; np];
    for a in 0..np {
        f.add(a, a, 1.0 / priors.sigma2_beta);
    }
    for &i in model.observed() {
        let row = model.design_row(i);
        let y = model.cells()[i].mu_hat.expect("observed direct mean");
        for a in 0..np {
            v[a] += row[a] * y;
            for b in 0..=a {
                f.add(a, b, row[a] * row[b]);
            }
        }
    }
    f.factorize()?;
    let beta = f.solve(&v);

    let cells = model.cells();
    let mu = (0..n)
        .map(|i| match cells[i].is_observed() {
            true => cells[i].mu_hat.expect("observed direct mean"),
            false => model.fixed_effect(&beta, i),
        })
        .collect();
    let sigma2_cell = cells.iter().map(|c| if c.is_observed() { c.sigma2_hat } else { None }).collect();
    let spatial = model.variant().is_spatial();
    Ok(ParameterState {
        mu,
        beta,
        eta0: vec![0.0; n],
        eta_s: vec![vec![0.0; j]; q],
        sigma2_cell,
        sigma2_eps: prior_mean(priors.shape, priors.b_eps),
        sigma2_eta0: prior_mean(priors.shape, priors.b_eta0),
        sigma2_eta_s: vec![prior_mean(priors.shape, priors.b_eta_s); q],
        rho_eta0: spatial.then(|| midpoint(priors.rho)),
        alpha_eta0: midpoint(priors.alpha),
        rho_eta_s: vec![midpoint(priors.rho); q],
    })
}

/// Over-dispersed start for chain `c > 0`: correlations uniform over the
/// middle 60% of their bounds and process variances scaled by a factor in
/// `[1/2, 2]`.
fn jitter<R: Rng + ?Sized>(state: &mut ParameterState, model: &Model, rng: &mut R) {
    let priors = &model.spec().priors;
    let corr = |b: Bounds, rng: &mut R| b.lower + (b.upper - b.lower) * rng.random_range(0.2..0.8);
    let scale = |rng: &mut R| (rng.random_range(-1.0f64..1.0) * std::f64::consts::LN_2).exp();
    if state.rho_eta0.is_some() {
        state.rho_eta0 = Some(corr(priors.rho, rng));
    }
    state.alpha_eta0 = corr(priors.alpha, rng);
    for r in &mut state.rho_eta_s {
        *r = corr(priors.rho, rng);
    }
    state.sigma2_eps *= scale(rng);
    state.sigma2_eta0 *= scale(rng);
    for s in &mut state.sigma2_eta_s {
        *s *= scale(rng);
    }
}

pub struct ChainOutput {
    pub states: Vec<ParameterState>,
    pub acceptance: ChainAcceptance,
}

/// Runs one chain from its own substream.
pub fn run_chain(model: &Model, config: &SamplerConfig, chain: usize) -> Result<ChainOutput> {
    let wrap = |iteration: usize| move |e: Error| Error::Sampler {
        chain,
        iteration,
        source: Box::new(e),
    };
    let mut state = initial_state(model).map_err(wrap(0))?;
    if chain > 0 {
        jitter(&mut state, model, &mut substream(config.seed, Purpose::Initialization, chain as u64));
    }
    let q = model.q();
    let mut sampler = Sampler::new(
        model,
        StepSizes {
            eta0: config.step_eta0,
            eta_s: vec![config.step_eta_s; q],
        },
    );
    let mut rng = substream(config.seed, Purpose::Chain, chain as u64);
    let mut eta0_count = AcceptCount::default();
    let mut eta_s_count = vec![AcceptCount::default(); q];
    let mut window_eta0 = 0usize;
    let mut window_eta_s = vec![0usize; q];
    let mut batch = 0usize;
    let mut states = Vec::with_capacity(config.draws_per_chain());

    for it in 0..config.iterations {
        let outcome = sampler.sweep(&mut state, &mut rng).map_err(wrap(it))?;
        let burn = it < config.burn_in;
        eta0_count.record(outcome.eta0_accepted, burn);
        for (c, &a) in eta_s_count.iter_mut().zip(&outcome.eta_s_accepted) {
            c.record(a, burn);
        }
        if burn {
            window_eta0 += usize::from(outcome.eta0_accepted);
            for (w, &a) in window_eta_s.iter_mut().zip(&outcome.eta_s_accepted) {
                *w += usize::from(a);
            }
            if (it + 1) % config.adapt_window == 0 {
                batch += 1;
                let delta = (1.0 / (batch as f64).sqrt()).min(0.5);
                let adjust = |accepted: usize| {
                    let rate = accepted as f64 / config.adapt_window as f64;
                    if rate > config.target_acceptance {
                        delta.exp()
                    } else {
                        (-delta).exp()
                    }
                };
                let f = adjust(window_eta0);
                sampler.steps.eta0.iter_mut().for_each(|s| *s *= f);
                for (s, w) in sampler.steps.eta_s.iter_mut().zip(&window_eta_s) {
                    *s *= adjust(*w);
                }
                window_eta0 = 0;
                window_eta_s.iter_mut().for_each(|w| *w = 0);
            }
        } else if (it + 1 - config.burn_in) % config.thin == 0 {
            debug_assert!(validate_state(&state, model.spec(), &model.index(), model.p()).is_empty());
            states.push(state.clone());
        }
    }
    Ok(ChainOutput {
        states,
        acceptance: ChainAcceptance {
            chain,
            eta0: eta0_count,
            eta_s: eta_s_count,
            final_steps: sampler.steps,
        },
    })
}

/// Runs `n_chains` chains concurrently; the result depends only on the
/// seed, config and data.
pub fn run_chains(model: &Model, config: &SamplerConfig) -> Result<PosteriorDraws> {
    config.validate()?;
    let outputs: Vec<ChainOutput> = (0..config.n_chains)
        .into_par_iter()
        .map(|c| run_chain(model, config, c))
        .collect::<Result<_>>()?;
    let mut draws = PosteriorDraws {
        layout: DrawLayout {
            index: model.index(),
            variant: model.variant(),
            p: model.p(),
            q: model.q(),
            observed: model.observed().to_vec(),
        },
        seed: config.seed,
        n_chains: config.n_chains,
        chain: Vec::with_capacity(config.total_draws()),
        states: Vec::with_capacity(config.total_draws()),
        acceptance: Vec::with_capacity(config.n_chains),
    };
    for (c, out) in outputs.into_iter().enumerate() {
        draws.chain.extend(std::iter::repeat_n(c, out.states.len()));
        draws.states.extend(out.states);
        draws.acceptance.push(out.acceptance);
    }
    Ok(draws)
}
