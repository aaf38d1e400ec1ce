//! Separable space-time covariance `σ² R(ρ) ⊗ A(α)` under area-major stacking.
//!
//! Neither the covariance nor its inverse is ever formed. Quadratic forms
//! apply `A^{-1}` per area block and combine blocks through `D − ρW`; the
//! log-determinant uses the AR(1) Cholesky diagonal and the CAR spectrum.

use crate::error::Result;
use crate::kernels::ar1::Ar1Kernel;
use crate::kernels::car::{car_logdet_from_parts, CarKernel};

#[derive(Debug, Clone, Copy)]
pub struct KroneckerKernel<'g> {
    car: CarKernel<'g>,
    ar1: Ar1Kernel,
}

impl<'g> KroneckerKernel<'g> {
    pub fn new(car: CarKernel<'g>, ar1: Ar1Kernel) -> Self {
        Self { car, ar1 }
    }

    pub fn car(&self) -> &CarKernel<'g> {
        &self.car
    }

    pub fn ar1(&self) -> &Ar1Kernel {
        &self.ar1
    }

    pub fn len(&self) -> usize {
        self.car.n_areas() * self.ar1.n_times()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `log|σ² R(ρ) ⊗ A(α)|`.
    pub fn log_det(&self, sigma2: f64, rho: f64, alpha: f64) -> Result<f64> {
        let g = self.car.graph();
        kron_logdet_from_parts(g.degrees(), g.eigenvalues(), self.ar1.n_times(), sigma2, rho, alpha)
    }

    /// `ηᵀ (σ² R(ρ) ⊗ A(α))^{-1} η`.
    pub fn quad_form(&self, sigma2: f64, rho: f64, alpha: f64, eta: &[f64]) -> f64 {
        let t = self.ar1.n_times();
        let g = self.car.graph();
        debug_assert_eq!(eta.len(), self.len());
        let mut whitened = vec![0.0; eta.len()];
        for (block, out) in eta.chunks_exact(t).zip(whitened.chunks_exact_mut(t)) {
            self.ar1.precision_apply(alpha, block, out);
        }
        let mut diag = 0.0;
        for (j, d) in g.degrees().iter().enumerate() {
            diag += d * dot(&eta[j * t..(j + 1) * t], &whitened[j * t..(j + 1) * t]);
        }
        let mut off = 0.0;
        for (j, k) in g.edges() {
            off += dot(&eta[j * t..(j + 1) * t], &whitened[k * t..(k + 1) * t]);
        }
        (diag - 2.0 * rho * off) / sigma2
    }

    /// `out = (σ² R(ρ) ⊗ A(α))^{-1} x`.
    pub fn precision_apply(&self, sigma2: f64, rho: f64, alpha: f64, x: &[f64], out: &mut [f64]) {
        let t = self.ar1.n_times();
        let g = self.car.graph();
        let mut whitened = vec![0.0; x.len()];
        for (block, w) in x.chunks_exact(t).zip(whitened.chunks_exact_mut(t)) {
            self.ar1.precision_apply(alpha, block, w);
        }
        for j in 0..g.n_areas() {
            let d = g.degrees()[j];
            for s in 0..t {
                let nb: f64 = g.neighbors(j).iter().map(|&k| whitened[k * t + s]).sum();
                out[j * t + s] = (d * whitened[j * t + s] - rho * nb) / sigma2;
            }
        }
    }
}

/// `log|σ² R⊗A| = 2J Σ log b − N log(1/σ²) − T Σ log(d ⊙ (1 − ρλ))`.
pub fn kron_logdet_from_parts(
    degrees: &[f64],
    eigenvalues: &[f64],
    n_times: usize,
    sigma2: f64,
    rho: f64,
    alpha: f64,
) -> Result<f64> {
    let j = degrees.len() as f64;
    let n = j * n_times as f64;
    let ar1 = Ar1Kernel::new(n_times);
    let log_b: f64 = ar1.cholesky_diagonal(alpha).iter().map(|b| b.ln()).sum();
    let car = car_logdet_from_parts(degrees, eigenvalues, rho)?;
    Ok(2.0 * j * log_b - n * (1.0 / sigma2).ln() - n_times as f64 * car)
}

pub fn kron_logdet(kernel: &KroneckerKernel<'_>, sigma2: f64, rho: f64, alpha: f64) -> Result<f64> {
    kernel.log_det(sigma2, rho, alpha)
}

pub fn kron_precision_quadform(kernel: &KroneckerKernel<'_>, eta: &[f64], sigma2: f64, rho: f64, alpha: f64) -> f64 {
    kernel.quad_form(sigma2, rho, alpha, eta)
}

/// `log|σ² I_J ⊗ A(α)|` for area-independent AR(1) blocks.
pub fn block_ar1_logdet(n_areas: usize, n_times: usize, sigma2: f64, alpha: f64) -> f64 {
    let n = (n_areas * n_times) as f64;
    n * sigma2.ln() + n_areas as f64 * Ar1Kernel::new(n_times).log_det(alpha)
}

/// `ηᵀ (σ² I_J ⊗ A(α))^{-1} η`.
pub fn block_ar1_quadform(n_times: usize, eta: &[f64], sigma2: f64, alpha: f64) -> f64 {
    let ar1 = Ar1Kernel::new(n_times);
    eta.chunks_exact(n_times).map(|b| ar1.quad_form(alpha, b)).sum::<f64>() / sigma2
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
