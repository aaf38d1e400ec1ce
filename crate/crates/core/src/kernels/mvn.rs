use crate::kernels::envelope::EnvelopeCholesky;

/// Draws from `N(Q^{-1} v, Q^{-1})` given a factorized precision `Q = L Lᵀ`.
///
/// Computes `L^{-T}(L^{-1} v + z)` with `z` standard normal noise in the
/// factor's permuted coordinates. Zero noise returns the conditional mean.
pub fn sample_mvn_canonical(factor: &EnvelopeCholesky, v: &[f64], noise: &[f64]) -> Vec<f64> {
    assert_eq!(v.len(), factor.dim());
    assert_eq!(noise.len(), factor.dim());
    let mut y = factor.permute_in(v);
    factor.solve_lower(&mut y);
    for (yi, z) in y.iter_mut().zip(noise) {
        *yi += z;
    }
    factor.solve_upper(&mut y);
    factor.permute_out(&y)
}
