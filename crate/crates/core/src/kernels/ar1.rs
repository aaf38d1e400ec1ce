use nalgebra::DMatrix;

/// First-order autoregressive correlation `A(α)_{ts} = α^{|t-s|}` over `T` steps.
///
/// Everything is closed form: the Cholesky factor, its diagonal, the
/// tridiagonal inverse and the log-determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ar1Kernel {
    n_times: usize,
}

impl Ar1Kernel {
    pub fn new(n_times: usize) -> Self {
        assert!(n_times > 0, "AR(1) kernel needs at least one time step");
        Self { n_times }
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn correlation(&self, alpha: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_times, self.n_times, |t, s| alpha.powi((t as i32 - s as i32).abs()))
    }

    /// Lower Cholesky factor `B` with `A = B Bᵀ`.
    pub fn cholesky_factor(&self, alpha: f64) -> DMatrix<f64> {
        let tail = (1.0 - alpha * alpha).sqrt();
        DMatrix::from_fn(self.n_times, self.n_times, |t, s| match s {
            _ if s > t => 0.0,
            0 => alpha.powi(t as i32),
            _ => alpha.powi((t - s) as i32) * tail,
        })
    }

    /// Diagonal of the Cholesky factor: `[1, √(1-α²), …]`.
    pub fn cholesky_diagonal(&self, alpha: f64) -> Vec<f64> {
        let tail = (1.0 - alpha * alpha).sqrt();
        (0..self.n_times).map(|t| if t == 0 { 1.0 } else { tail }).collect()
    }

    /// Entry `(t, s)` of `A(α)^{-1}`; zero outside the tridiagonal band.
    #[inline]
    pub fn precision_entry(&self, alpha: f64, t: usize, s: usize) -> f64 {
        if self.n_times == 1 {
            return if t == s { 1.0 } else { 0.0 };
        }
        let scale = 1.0 / (1.0 - alpha * alpha);
        if t == s {
            if t == 0 || t + 1 == self.n_times {
                scale
            } else {
                (1.0 + alpha * alpha) * scale
            }
        } else if t.abs_diff(s) == 1 {
            -alpha * scale
        } else {
            0.0
        }
    }

    /// `out = A(α)^{-1} x` in O(T).
    pub fn precision_apply(&self, alpha: f64, x: &[f64], out: &mut [f64]) {
        let n = self.n_times;
        debug_assert!(x.len() == n && out.len() == n);
        if n == 1 {
            out[0] = x[0];
            return;
        }
        let scale = 1.0 / (1.0 - alpha * alpha);
        let mid = 1.0 + alpha * alpha;
        out[0] = (x[0] - alpha * x[1]) * scale;
        for t in 1..n - 1 {
            out[t] = (mid * x[t] - alpha * (x[t - 1] + x[t + 1])) * scale;
        }
        out[n - 1] = (x[n - 1] - alpha * x[n - 2]) * scale;
    }

    /// `xᵀ A(α)^{-1} x`.
    pub fn quad_form(&self, alpha: f64, x: &[f64]) -> f64 {
        let n = self.n_times;
        if n == 1 {
            return x[0] * x[0];
        }
        let diag: f64 = x.iter().map(|v| v * v).sum::<f64>() + alpha * alpha * x[1..n - 1].iter().map(|v| v * v).sum::<f64>();
        let off: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
        (diag - 2.0 * alpha * off) / (1.0 - alpha * alpha)
    }

    pub fn log_det(&self, alpha: f64) -> f64 {
        ar1_logdet(self.n_times, alpha)
    }
}

/// `log|A(α)| = (T-1) log(1-α²)`.
pub fn ar1_logdet(n_times: usize, alpha: f64) -> f64 {
    (n_times.saturating_sub(1)) as f64 * (1.0 - alpha * alpha).ln()
}
