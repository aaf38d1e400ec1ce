use serde::{Deserialize, Serialize};

use crate::panel::{PanelIndex, ParameterState, Variant};
use crate::mcmc::steps::StepSizes;

/// Shape of a flattened [`ParameterState`] record.
///
/// Order: `μ` (N), `β` (p+1), `η0` (N), `η^s` (q·J, term-major),
/// `σ²_{j,t}` on OBSERVED cells, `σ²_ε`, `σ²_{η0}`, `σ²_{η^s}` (q),
/// `ρ_{η0}` (spatial variants only), `α_{η0}`, `ρ_{η^s}` (q).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawLayout {
    pub index: PanelIndex,
    pub variant: Variant,
    pub p: usize,
    pub q: usize,
    pub observed: Vec<usize>,
}

impl DrawLayout {
    pub fn width(&self) -> usize {
        let (n, j, q) = (self.index.len(), self.index.n_areas(), self.q);
        2 * n + (self.p + 1) + q * j + self.observed.len() + 2 + q + usize::from(self.variant.is_spatial()) + 1 + q
    }

    pub fn flatten(&self, s: &ParameterState) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        out.extend_from_slice(&s.mu);
        out.extend_from_slice(&s.beta);
        out.extend_from_slice(&s.eta0);
        for e in &s.eta_s {
            out.extend_from_slice(e);
        }
        out.extend(self.observed.iter().map(|&i| s.sigma2_cell[i].expect("observed cell variance")));
        out.push(s.sigma2_eps);
        out.push(s.sigma2_eta0);
        out.extend_from_slice(&s.sigma2_eta_s);
        if let Some(r) = s.rho_eta0 {
            out.push(r);
        }
        out.push(s.alpha_eta0);
        out.extend_from_slice(&s.rho_eta_s);
        debug_assert_eq!(out.len(), self.width());
        out
    }

    pub fn unflatten(&self, record: &[f64]) -> ParameterState {
        assert_eq!(record.len(), self.width());
        let (n, j, q) = (self.index.len(), self.index.n_areas(), self.q);
        let mut at = 0;
        let mut take = |len: usize| {
            let s = &record[at..at + len];
            at += len;
            s.to_vec()
        };
        let mu = take(n);
        let beta = take(self.p + 1);
        let eta0 = take(n);
        let eta_s = (0..q).map(|_| take(j)).collect();
        let cell = take(self.observed.len());
        let mut sigma2_cell = vec![None; n];
        for (&i, v) in self.observed.iter().zip(cell) {
            sigma2_cell[i] = Some(v);
        }
        let sigma2_eps = take(1)[0];
        let sigma2_eta0 = take(1)[0];
        let sigma2_eta_s = take(q);
        let rho_eta0 = self.variant.is_spatial().then(|| take(1)[0]);
        let alpha_eta0 = take(1)[0];
        let rho_eta_s = take(q);
        ParameterState {
            mu,
            beta,
            eta0,
            eta_s,
            sigma2_cell,
            sigma2_eps,
            sigma2_eta0,
            sigma2_eta_s,
            rho_eta0,
            alpha_eta0,
            rho_eta_s,
        }
    }

    /// Human-readable name of every record position, 1-based in area and time.
    pub fn names(&self) -> Vec<String> {
        let idx = self.index;
        let cell = |i: usize| {
            let (a, t) = idx.unflat(i);
            format!("{},{}", a + 1, t + 1)
        };
        let mut out = Vec::with_capacity(self.width());
        out.extend((0..idx.len()).map(|i| format!("mu[{}]", cell(i))));
        out.extend((0..=self.p).map(|k| format!("beta[{k}]")));
        out.extend((0..idx.len()).map(|i| format!("eta0[{}]", cell(i))));
        for k in 0..self.q {
            out.extend((0..idx.n_areas()).map(|a| format!("eta_s[{},{}]", k + 1, a + 1)));
        }
        out.extend(self.observed.iter().map(|&i| format!("sigma2_cell[{}]", cell(i))));
        out.push("sigma2_eps".into());
        out.push("sigma2_eta0".into());
        out.extend((0..self.q).map(|k| format!("sigma2_eta_s[{}]", k + 1)));
        if self.variant.is_spatial() {
            out.push("rho_eta0".into());
        }
        out.push("alpha_eta0".into());
        out.extend((0..self.q).map(|k| format!("rho_eta_s[{}]", k + 1)));
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptCount {
    pub burn_in_accepted: u64,
    pub burn_in_proposed: u64,
    pub accepted: u64,
    pub proposed: u64,
}

impl AcceptCount {
    pub fn record(&mut self, accepted: bool, burn_in: bool) {
        if burn_in {
            self.burn_in_proposed += 1;
            self.burn_in_accepted += u64::from(accepted);
        } else {
            self.proposed += 1;
            self.accepted += u64::from(accepted);
        }
    }

    /// Post-burn-in acceptance rate.
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainAcceptance {
    pub chain: usize,
    pub eta0: AcceptCount,
    pub eta_s: Vec<AcceptCount>,
    pub final_steps: StepSizes,
}

/// Thinned post-burn-in states from every chain, chain-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub layout: DrawLayout,
    pub seed: u64,
    pub n_chains: usize,
    pub chain: Vec<usize>,
    pub states: Vec<ParameterState>,
    pub acceptance: Vec<ChainAcceptance>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index(&self) -> PanelIndex {
        self.layout.index
    }

    pub fn draws_per_chain(&self) -> usize {
        self.states.len() / self.n_chains.max(1)
    }

    /// Draws of `μ_i` for flat cell `i`.
    pub fn mu(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.mu[i]).collect()
    }

    /// `M × N` matrix of `μ` draws, row per draw.
    pub fn mu_rows(&self) -> Vec<&[f64]> {
        self.states.iter().map(|s| s.mu.as_slice()).collect()
    }

    /// Any scalar functional of the state, split by chain.
    pub fn by_chain(&self, f: impl Fn(&ParameterState) -> f64) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.draws_per_chain()); self.n_chains];
        for (c, s) in self.chain.iter().zip(&self.states) {
            out[*c].push(f(s));
        }
        out
    }

    /// Row per draw, flattened per [`DrawLayout`].
    pub fn records(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(|s| self.layout.flatten(s)).collect()
    }
}
