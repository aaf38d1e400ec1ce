//! Split-R̂ and effective sample size for scalar traces.

fn split(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[c.len() - h..]]
        })
        .filter(|c| !c.is_empty())
        .collect()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// `(W, var⁺)` over split chains.
fn variance_components(halves: &[&[f64]]) -> Option<(f64, f64)> {
    let m = halves.len();
    let n = halves.first()?.len();
    if m < 2 || n < 2 {
        return None;
    }
    let means: Vec<f64> = halves.iter().map(|c| mean(c)).collect();
    let b = n as f64 * var(&means);
    let w = halves.iter().map(|c| var(c)).sum::<f64>() / m as f64;
    Some((w, (n as f64 - 1.0) / n as f64 * w + b / n as f64))
}

/// Potential scale reduction over split chains; `NaN` with fewer than
/// two halves of length two.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    match variance_components(&split(chains)) {
        None => f64::NAN,
        Some((w, vp)) if w == 0.0 => {
            if vp == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        }
        Some((w, vp)) => (vp / w).sqrt(),
    }
}

/// Effective sample size from variogram autocorrelations over split
/// chains, truncated by Geyer's initial positive sequence.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let halves = split(chains);
    let Some((_, vp)) = variance_components(&halves) else {
        return f64::NAN;
    };
    let m = halves.len();
    let n = halves[0].len();
    let total = (m * n) as f64;
    if vp == 0.0 {
        return total;
    }
    let rho = |t: usize| {
        let v: f64 = halves
            .iter()
            .map(|c| (t..n).map(|i| (c[i] - c[i - t]).powi(2)).sum::<f64>())
            .sum::<f64>()
            / (m * (n - t)) as f64;
        1.0 - v / (2.0 * vp)
    };
    let mut sum = 0.0;
    let mut t = 1;
    while t + 1 < n {
        let pair = rho(t) + rho(t + 1);
        if pair < 0.0 {
            break;
        }
        sum += pair;
        t += 2;
    }
    total / (1.0 + 2.0 * sum).max(1.0 / total)
}
