//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use stfh::io::{emit_results, load_panel_csv, write_panel_csv, EmitOptions, PanelLabels};
use stfh::kernels::{ar1_logdet, block_ar1_logdet, block_ar1_quadform, Ar1Kernel, CarKernel, KroneckerKernel};
use stfh::mcmc::{initial_state, log_target_eta0, log_target_eta_s, read_draws, write_draws, Sampler, StepSizes};
use stfh::posterior::elpd_diff;
use stfh::sim::study::{default_spec, fit_model, run_replicate, score_study, ModelFit};
use stfh::sim::{draw_replicate, generate_population, synthetic_sample_sizes, AreaPartition, CovariateSurface, PopulationConfig, StudyConfig};
use stfh::{run_chains, AreaGraph, Cell, Covariates, DirectTable, Model, ModelSpec, PanelIndex, ParameterState, PriorConfig, SamplerConfig, Variant};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

// ---------------------------------------------------------------------------
// Dense oracles, built from edge lists without touching the kernels.

fn dense_car_precision(n: usize, edges: &[(usize, usize)], rho: f64) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n);
    for &(a, b) in edges {
        q[(a, b)] -= rho;
        q[(b, a)] -= rho;
        q[(a, a)] += 1.0;
        q[(b, b)] += 1.0;
    }
    q
}

fn dense_ar1(t: usize, alpha: f64) -> DMatrix<f64> {
    DMatrix::from_fn(t, t, |i, j| alpha.powi((i as i32 - j as i32).abs()))
}

fn dense_logdet(m: &DMatrix<f64>) -> f64 {
    let l = m.clone().cholesky().expect("oracle matrix is SPD").unpack();
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

fn dense_quad(cov: &DMatrix<f64>, x: &[f64]) -> f64 {
    let x = DVector::from_column_slice(x);
    let sol = cov.clone().cholesky().expect("oracle matrix is SPD").solve(&x);
    x.dot(&sol)
}

fn dense_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().cholesky().expect("oracle matrix is SPD").inverse()
}

/// Unique undirected 0-based edges of a random connected graph.
fn random_graph(r: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = r.random_range(0..i);
        edges.insert((j, i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < 0.08 {
                edges.insert((i, j));
            }
        }
    }
    edges.into_iter().collect()
}

fn one_based(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    edges.iter().map(|&(a, b)| (a + 1, b + 1)).collect()
}

// ---------------------------------------------------------------------------

fn c1_kernels(rep: &mut Report) {
    let start = Instant::now();
    let mut r = rng(101);
    let (mut worst_ld, mut worst_qf) = (0.0f64, 0.0f64);
    let tuples = 200;
    for _ in 0..tuples {
        let j = r.random_range(2..=30);
        let t = r.random_range(2..=10);
        let rho = r.random_range(0.01..0.99);
        let alpha = r.random_range(0.01..0.99);
        let s2 = r.random_range(0.1..10.0);
        let edges = random_graph(&mut r, j);
        let graph = AreaGraph::new(j, &one_based(&edges)).unwrap();
        let eta: Vec<f64> = (0..j * t).map(|_| normal(&mut r)).collect();

        let kernel = KroneckerKernel::new(CarKernel::new(&graph), Ar1Kernel::new(t));
        let cov = dense_inverse(&dense_car_precision(j, &edges, rho)).kronecker(&dense_ar1(t, alpha)) * s2;
        worst_ld = worst_ld.max((kernel.log_det(s2, rho, alpha).unwrap() - dense_logdet(&cov)).abs());
        let q = dense_quad(&cov, &eta);
        worst_qf = worst_qf.max((kernel.quad_form(s2, rho, alpha, &eta) - q).abs() / q.abs());

        let block = DMatrix::<f64>::identity(j, j).kronecker(&dense_ar1(t, alpha)) * s2;
        worst_ld = worst_ld.max((block_ar1_logdet(j, t, s2, alpha) - dense_logdet(&block)).abs());
        let q = dense_quad(&block, &eta);
        worst_qf = worst_qf.max((block_ar1_quadform(t, &eta, s2, alpha) - q).abs() / q.abs());
    }
    let elapsed = start.elapsed();
    rep.line(
        "C1 structure-kernel exactness",
        worst_ld <= 1e-8 && worst_qf <= 1e-8 && elapsed < Duration::from_secs(30),
        format!("{tuples} tuples, max |Δlogdet| {worst_ld:.2e} (tol 1e-8), max rel Δquad {worst_qf:.2e} (tol 1e-8), {elapsed:.1?} (budget 30s)"),
    );
}

fn c2_ar1(rep: &mut Report) {
    let mut worst = 0.0f64;
    for t in 2..=20 {
        for k in 1..=19 {
            let alpha = 0.05 * k as f64;
            let dense = dense_ar1(t, alpha).determinant().ln();
            worst = worst.max((ar1_logdet(t, alpha) - dense).abs());
        }
    }
    rep.line("C2 AR(1) closed-form log-determinant", worst <= 1e-10, format!("T 2..=20, α 0.05..=0.95, max |Δ| {worst:.2e} (tol 1e-10)"));
}

// ---------------------------------------------------------------------------
// Conditional fixture: J = 4 path, T = 3, one space-varying covariate.

const J: usize = 4;
const T: usize = 3;
const N: usize = J * T;
const PATH: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 3)];

fn fixture_x() -> Vec<f64> {
    (0..N).map(|i| ((i * 5 % 7) as f64 - 3.0) * 0.4).collect()
}

fn fixture_cells() -> Vec<Cell> {
    (0..N)
        .map(|i| match i {
            4 => Cell::empty(),
            7 => Cell::new(1, Some(2.0), None).unwrap(),
            _ => Cell::new(8 + i, Some(10.0 + (i as f64).sin() * 3.0), Some(0.5 + 0.1 * i as f64)).unwrap(),
        })
        .collect()
}

fn fixture_priors() -> PriorConfig {
    PriorConfig {
        shape: 3.0,
        sigma2_beta: 50.0,
        mu_beta: 1.0,
        b_eps: 0.7,
        b_eta0: 1.3,
        b_eta_s: 0.9,
        ..PriorConfig::default()
    }
}

fn fixture_model(variant: Variant) -> Model {
    let table = DirectTable::new(PanelIndex::new(J, T).unwrap(), fixture_cells()).unwrap();
    let cov = Covariates::new(vec!["x".into()], vec![fixture_x()]).unwrap();
    let svc = if variant == Variant::Full { vec![0] } else { vec![] };
    let graph = AreaGraph::new(J, &one_based(&PATH)).unwrap();
    Model::new(table, cov, Some(graph), ModelSpec::new(variant, svc, fixture_priors())).unwrap()
}

fn fixture_state(model: &Model) -> ParameterState {
    let mut s = initial_state(model).unwrap();
    s.beta = vec![9.0, 0.7];
    s.eta0 = (0..N).map(|i| (i as f64 * 0.9).cos()).collect();
    for e in &mut s.eta_s {
        *e = vec![0.3, -0.2, 0.5, -0.1];
    }
    s.mu = (0..N).map(|i| 10.0 + (i as f64 * 1.3).sin()).collect();
    for (i, v) in s.sigma2_cell.iter_mut().enumerate() {
        if v.is_some() {
            *v = Some(0.4 + 0.05 * i as f64);
        }
    }
    s.sigma2_eps = 0.8;
    s.sigma2_eta0 = 1.7;
    s.sigma2_eta_s.iter_mut().for_each(|v| *v = 0.6);
    s.rho_eta0 = Some(0.65);
    s.alpha_eta0 = 0.4;
    s.rho_eta_s.iter_mut().for_each(|r| *r = 0.3);
    s
}

/// Sample mean and variance checked against analytic values; returns the
/// larger of the two |error| / MC-SE ratios.
fn moment_z(samples: &[f64], mean: f64, var: f64) -> f64 {
    let m = samples.len() as f64;
    let xbar = samples.iter().sum::<f64>() / m;
    let s2 = samples.iter().map(|x| (x - xbar).powi(2)).sum::<f64>() / (m - 1.0);
    let m4 = samples.iter().map(|x| (x - xbar).powi(4)).sum::<f64>() / m;
    let z_mean = (xbar - mean).abs() / (var / m).sqrt();
    let z_var = (s2 - var).abs() / ((m4 - s2 * s2) / m).sqrt();
    z_mean.max(z_var)
}

fn ig_moments(a: f64, b: f64) -> (f64, f64) {
    (b / (a - 1.0), b * b / ((a - 1.0).powi(2) * (a - 2.0)))
}

/// Draws `m` times from a frozen conditional and collects the coordinates.
fn collect<F: FnMut(&mut ParameterState, &mut ChaCha8Rng)>(
    base: &ParameterState,
    m: usize,
    seed: u64,
    mut step: F,
    read: impl Fn(&ParameterState) -> Vec<f64>,
) -> Vec<Vec<f64>> {
    let mut s = base.clone();
    let mut r = rng(seed);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for _ in 0..m {
        step(&mut s, &mut r);
        let v = read(&s);
        if out.is_empty() {
            out = vec![Vec::with_capacity(m); v.len()];
        }
        for (o, x) in out.iter_mut().zip(v) {
            o.push(x);
        }
    }
    out
}

fn worst_z(samples: &[Vec<f64>], moments: &[(f64, f64)]) -> f64 {
    samples.iter().zip(moments).map(|(s, &(m, v))| moment_z(s, m, v)).fold(0.0, f64::max)
}

/// Mean and variance of each coordinate of `N(P⁻¹v, P⁻¹)`.
fn canonical_moments(precision: &DMatrix<f64>, v: &DVector<f64>) -> Vec<(f64, f64)> {
    let cov = dense_inverse(precision);
    let mean = &cov * v;
    (0..v.len()).map(|k| (mean[k], cov[(k, k)])).collect()
}

fn c3_conjugacy(rep: &mut Report) {
    let start = Instant::now();
    let m = 100_000;
    let model = fixture_model(Variant::Full);
    let s0 = fixture_state(&model);
    let pr = fixture_priors();
    let x = fixture_x();
    let cells = fixture_cells();
    let mut sampler = Sampler::new(&model, StepSizes { eta0: [0.5, 0.5], eta_s: vec![0.5] });

    // Dense design pieces.
    let xmat = DMatrix::from_fn(N, 2, |i, c| if c == 0 { 1.0 } else { x[i] });
    let xz = DMatrix::from_fn(N, J, |i, a| if i / T == a { x[i] } else { 0.0 });
    let beta = DVector::from_column_slice(&s0.beta);
    let eta0 = DVector::from_column_slice(&s0.eta0);
    let eta_s = DVector::from_column_slice(&s0.eta_s[0]);
    let mu = DVector::from_column_slice(&s0.mu);
    let mean_vec = &eta0 + &xmat * &beta + &xz * &eta_s;
    let car0 = dense_car_precision(J, &PATH, s0.rho_eta0.unwrap());
    let prec_eta0 = car0.kronecker(&dense_inverse(&dense_ar1(T, s0.alpha_eta0))) / s0.sigma2_eta0;
    let car_s = dense_car_precision(J, &PATH, s0.rho_eta_s[0]);
    let observed: Vec<usize> = (0..N).filter(|&i| cells[i].is_observed()).collect();
    let missing: Vec<usize> = (0..N).filter(|&i| !cells[i].is_observed()).collect();
    let eps = s0.sigma2_eps;

    let mut results: Vec<(&str, f64)> = Vec::new();

    // Step 1.
    let moments: Vec<(f64, f64)> = observed
        .iter()
        .map(|&i| {
            let s2 = s0.sigma2_cell[i].unwrap();
            let var = 1.0 / (1.0 / s2 + 1.0 / eps);
            (var * (cells[i].mu_hat.unwrap() / s2 + mean_vec[i] / eps), var)
        })
        .collect();
    let d = collect(&s0, m, 1, |s, r| sampler.update_mu_observed(s, r), |s| observed.iter().map(|&i| s.mu[i]).collect());
    results.push(("step 1 μ observed", worst_z(&d, &moments)));

    // Step 2.
    let moments: Vec<(f64, f64)> = missing.iter().map(|&i| (mean_vec[i], eps)).collect();
    let d = collect(&s0, m, 2, |s, r| sampler.update_mu_missing(s, r), |s| missing.iter().map(|&i| s.mu[i]).collect());
    results.push(("step 2 μ missing", worst_z(&d, &moments)));

    // Step 3.
    let prec = DMatrix::identity(2, 2) / pr.sigma2_beta + xmat.transpose() * &xmat / eps;
    let v = DVector::from_element(2, pr.mu_beta / pr.sigma2_beta) + xmat.transpose() * (&mu - &eta0 - &xz * &eta_s) / eps;
    let moments = canonical_moments(&prec, &v);
    let d = collect(&s0, m, 3, |s, r| sampler.update_beta(s, r).unwrap(), |s| s.beta.clone());
    results.push(("step 3 β", worst_z(&d, &moments)));

    // Step 4.
    let prec = &prec_eta0 + DMatrix::identity(N, N) / eps;
    let v = (&mu - &xmat * &beta - &xz * &eta_s) / eps;
    let moments = canonical_moments(&prec, &v);
    let d = collect(&s0, m, 4, |s, r| sampler.update_eta0(s, r).unwrap(), |s| s.eta0.clone());
    results.push(("step 4 η0", worst_z(&d, &moments)));

    // Step 5.
    let prec = &car_s / s0.sigma2_eta_s[0] + xz.transpose() * &xz / eps;
    let v = xz.transpose() * (&mu - &eta0 - &xmat * &beta) / eps;
    let moments = canonical_moments(&prec, &v);
    let d = collect(&s0, m, 5, |s, r| sampler.update_eta_s(s, 0, r).unwrap(), |s| s.eta_s[0].clone());
    results.push(("step 5 η^s", worst_z(&d, &moments)));

    // Step 6.
    let moments: Vec<(f64, f64)> = observed
        .iter()
        .map(|&i| {
            let c = &cells[i];
            let n = c.n as f64;
            let a = n / 2.0 + 0.5;
            let b = (n - 1.0) * c.sigma2_hat.unwrap() / 2.0 + (c.mu_hat.unwrap() - mu[i]).powi(2) / 2.0;
            ig_moments(a, b)
        })
        .collect();
    let d = collect(&s0, m, 6, |s, r| sampler.update_sigma2_cell(s, r), |s| observed.iter().map(|&i| s.sigma2_cell[i].unwrap()).collect());
    results.push(("step 6 σ²_cell", worst_z(&d, &moments)));

    // Step 7.
    let quad = eta0.dot(&(&prec_eta0 * &eta0)) * s0.sigma2_eta0;
    let moments = [ig_moments(pr.shape + N as f64 / 2.0, pr.b_eta0 + quad / 2.0)];
    let d = collect(&s0, m, 7, |s, r| sampler.update_sigma2_eta0(s, r), |s| vec![s.sigma2_eta0]);
    results.push(("step 7 σ²_η0", worst_z(&d, &moments)));

    // Step 8.
    let quad = eta_s.dot(&(&car_s * &eta_s));
    let moments = [ig_moments(pr.shape + J as f64 / 2.0, pr.b_eta_s + quad / 2.0)];
    let d = collect(&s0, m, 8, |s, r| sampler.update_sigma2_eta_s(s, 0, r), |s| vec![s.sigma2_eta_s[0]]);
    results.push(("step 8 σ²_ηs", worst_z(&d, &moments)));

    // Step 9.
    let rss = (&mu - &mean_vec).norm_squared();
    let moments = [ig_moments(pr.shape + N as f64 / 2.0, pr.b_eps + rss / 2.0)];
    let d = collect(&s0, m, 9, |s, r| sampler.update_sigma2_eps(s, r), |s| vec![s.sigma2_eps]);
    results.push(("step 9 σ²_ε", worst_z(&d, &moments)));

    let elapsed = start.elapsed();
    for (name, z) in &results {
        println!("    {name}: worst |error|/SE {z:.2}");
    }
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    rep.line(
        "C3 Gibbs conjugacy oracles",
        worst <= 3.0 && elapsed < Duration::from_secs(120),
        format!("{m} draws per step, worst |error|/SE {worst:.2} (tol 3), {elapsed:.1?} (budget 120s)"),
    );
}

fn c4_targets(rep: &mut Report) {
    let full = fixture_model(Variant::Full);
    let sub2 = fixture_model(Variant::Sub2);
    let mut r = rng(404);
    let mut worst = 0.0f64;
    let jac = |x: f64| x.ln() + (1.0 - x).ln();
    for _ in 0..20 {
        let mut s = fixture_state(&full);
        s.eta0 = (0..N).map(|_| normal(&mut r)).collect();
        s.eta_s[0] = (0..J).map(|_| normal(&mut r)).collect();
        s.sigma2_eta0 = r.random_range(0.2..5.0);
        s.sigma2_eta_s[0] = r.random_range(0.2..5.0);
        let (rho, alpha, rho_s) = (r.random_range(0.01..0.99), r.random_range(0.01..0.99), r.random_range(0.01..0.99));

        let cov = dense_inverse(&dense_car_precision(J, &PATH, rho)).kronecker(&dense_ar1(T, alpha)) * s.sigma2_eta0;
        let dense = -0.5 * dense_logdet(&cov) - 0.5 * dense_quad(&cov, &s.eta0) + jac(rho) + jac(alpha);
        worst = worst.max((log_target_eta0(&full, &s, Some(rho), alpha).unwrap() - dense).abs());

        let cov = DMatrix::<f64>::identity(J, J).kronecker(&dense_ar1(T, alpha)) * s.sigma2_eta0;
        let dense = -0.5 * dense_logdet(&cov) - 0.5 * dense_quad(&cov, &s.eta0) + jac(alpha);
        let mut s2 = fixture_state(&sub2);
        s2.eta0 = s.eta0.clone();
        s2.sigma2_eta0 = s.sigma2_eta0;
        worst = worst.max((log_target_eta0(&sub2, &s2, None, alpha).unwrap() - dense).abs());

        let cov = dense_inverse(&dense_car_precision(J, &PATH, rho_s)) * s.sigma2_eta_s[0];
        let dense = -0.5 * dense_logdet(&cov) - 0.5 * dense_quad(&cov, &s.eta_s[0]) + jac(rho_s);
        worst = worst.max((log_target_eta_s(&full, &s, 0, rho_s).unwrap() - dense).abs());
    }
    rep.line("C4 Metropolis target exactness", worst <= 1e-8, format!("20 points × 3 targets, max |Δ| {worst:.2e} (tol 1e-8)"));
}

fn c5_prior_weighting(rep: &mut Report) {
    let (j, t) = (5, 4);
    let index = PanelIndex::new(j, t).unwrap();
    let mu_hat: Vec<f64> = (0..j * t).map(|i| 10.0 + 2.0 * (1.7 * i as f64).sin()).collect();
    let s2_hat: Vec<f64> = (0..j * t).map(|i| 1.0 + 0.2 * i as f64).collect();
    let sampler = SamplerConfig {
        n_chains: 2,
        iterations: 6000,
        burn_in: 1000,
        thin: 1,
        seed: 5,
        ..Default::default()
    };
    let mut gaps = Vec::new();
    for n in [2usize, 10, 100, 1000] {
        let cells = (0..j * t).map(|i| Cell::new(n, Some(mu_hat[i]), Some(s2_hat[i])).unwrap()).collect();
        let table = DirectTable::new(index, cells).unwrap();
        let model = Model::new(table, Covariates::none(), None, ModelSpec::new(Variant::Sub2, vec![], PriorConfig::default())).unwrap();
        let draws = run_chains(&model, &sampler).unwrap();
        let m = draws.len() as f64;
        let gap = (0..j * t)
            .map(|i| {
                let mean = draws.states.iter().map(|s| s.sigma2_cell[i].unwrap()).sum::<f64>() / m;
                (mean - s2_hat[i]).abs() / s2_hat[i]
            })
            .sum::<f64>()
            / (j * t) as f64;
        gaps.push(gap);
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    rep.line(
        "C5 prior weighting of σ²_cell",
        monotone,
        format!("mean relative gap at n = 2, 10, 100, 1000: {}", gaps.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(", ")),
    );
}

// ---------------------------------------------------------------------------

fn desk_sampler() -> SamplerConfig {
    SamplerConfig {
        n_chains: 3,
        iterations: 3000,
        burn_in: 1000,
        thin: 4,
        ..Default::default()
    }
}

fn c6_c8_desk_study(rep: &mut Report) {
    let start = Instant::now();
    let population = generate_population(&PopulationConfig::default()).unwrap();
    let index = population.index;
    let empty = [8, 24, 40];
    let sizes = synthetic_sample_sizes(index, 60, &empty, 3);
    let config = StudyConfig {
        replicates: 25,
        sampler: desk_sampler(),
        seed: 11,
        ..Default::default()
    };
    let mut covariates = population.area_covariate();
    covariates.standardize();
    let graph = population.area_graph().unwrap();
    let fits: Vec<_> = (0..config.replicates)
        .map(|r| run_replicate(&population, &sizes, &config, &covariates, &graph, r).unwrap())
        .collect();
    let result = score_study(&population, &sizes, &config, &fits);
    let elapsed = start.elapsed();
    println!(
        "    desk study: J = {}, T = {}, R = {}, n range {}..={}, {elapsed:.1?}",
        index.n_areas(),
        index.n_times(),
        config.replicates,
        sizes.iter().min().unwrap(),
        sizes.iter().max().unwrap()
    );

    let small = |i: usize| (2..=10).contains(&sizes[i]);
    let direct_rmse = result.mu[0].average(small, |s| Some(s.rmse)).unwrap();
    let mut rmse_ok = true;
    let mut parts = vec![format!("direct {direct_rmse:.3}")];
    for k in 1..result.estimators.len() {
        let v = result.mu[k].average(small, |s| Some(s.rmse)).unwrap();
        rmse_ok &= v <= direct_rmse;
        parts.push(format!("{} {v:.3}", result.estimators[k]));
    }
    let n_small = (0..index.len()).filter(|&i| small(i)).count();
    rep.line("C6a cell RMSE, 2 ≤ n ≤ 10", rmse_ok, format!("{n_small} cells; {}", parts.join(", ")));

    let big = |i: usize| sizes[i] >= 5;
    let cover = result.mu[0].average(big, |s| s.cover).unwrap();
    rep.line("C6b direct coverage, n ≥ 5", (0.90..=0.99).contains(&cover), format!("{cover:.4} (window [0.90, 0.99])"));

    let has_direct = |a: usize| result.theta[0].scores[a].is_some();
    let direct_theta = result.theta[0].average(has_direct, |s| Some(s.rmse)).unwrap();
    let mut theta_ok = true;
    let mut parts = vec![format!("direct {direct_theta:.4}")];
    for k in 1..result.estimators.len() {
        let v = result.theta[k].average(has_direct, |s| Some(s.rmse)).unwrap();
        theta_ok &= v <= direct_theta;
        parts.push(format!("{} {v:.4}", result.estimators[k]));
    }
    rep.line("C6c trend RMSE", theta_ok, format!("{}", parts.join(", ")));
    rep.line("C6 runtime", elapsed < Duration::from_secs(7200), format!("{elapsed:.1?} (budget 2h)"));

    // C8 on the first replicate's fits.
    let t = index.n_times();
    let table = &fits[0].table;
    let all_missing: Vec<usize> = (0..index.n_areas()).filter(|&a| index.area_range(a).all(|i| !table.cells()[i].is_observed())).collect();
    let fully_observed: Vec<usize> = (0..index.n_areas()).filter(|&a| index.area_range(a).all(|i| table.cells()[i].is_observed())).collect();
    let mut ok = !all_missing.is_empty() && !fully_observed.is_empty();
    let mut parts = Vec::new();
    for fit in &fits[0].models {
        let finite = fit.mu.iter().all(|e| e.point.is_finite() && e.interval.is_some_and(|(l, u)| l.is_finite() && u.is_finite()));
        let mean_sd = |areas: &[usize]| areas.iter().flat_map(|&a| (a * t..(a + 1) * t).map(|i| fit.mu_sd[i])).sum::<f64>() / (areas.len() * t) as f64;
        let (missing_sd, observed_sd) = (mean_sd(&all_missing), mean_sd(&fully_observed));
        ok &= finite && missing_sd > observed_sd;
        parts.push(format!("{} {missing_sd:.3} vs {observed_sd:.3}", fit.variant.as_str()));
    }
    rep.line(
        "C8 missing areas carry more uncertainty",
        ok,
        format!("{} all-missing vs {} fully observed areas, mean posterior SD: {}", all_missing.len(), fully_observed.len(), parts.join(", ")),
    );
}

fn c7_waic(rep: &mut Report) {
    let start = Instant::now();
    let mut wins = 0;
    for seed in 1..=10u64 {
        let population = generate_population(&PopulationConfig {
            seed,
            grid: 60,
            partition: AreaPartition::Blocks { side: 6 },
            sigma2_w: 100.0,
            ..Default::default()
        })
        .unwrap();
        let sizes: Vec<usize> = synthetic_sample_sizes(population.index, 30, &[], seed).iter().map(|n| n + 3).collect();
        let table = draw_replicate(&population, &sizes, seed, 0).unwrap();
        let mut covariates = population.area_covariate();
        covariates.standardize();
        let graph = population.area_graph().unwrap();
        let sampler = SamplerConfig { seed, ..desk_sampler() };
        let fits: Vec<ModelFit> = [Variant::Full, Variant::Sub1, Variant::Sub2]
            .iter()
            .map(|&v| fit_model(&table, &covariates, Some(&graph), default_spec(v, 1, PriorConfig::default()), &sampler, 0.95, (0, 7)).unwrap())
            .collect();
        let d12 = elpd_diff(&fits[1].waic, &fits[2].waic);
        let d10 = elpd_diff(&fits[1].waic, &fits[0].waic);
        let win = d12.diff > 0.0 && d12.diff > 2.0 * d12.se;
        wins += win as usize;
        println!(
            "    seed {seed}: sub1 − sub2 elpd {:.2} (se {:.2}){}, sub1 − full {:.2} (se {:.2})",
            d12.diff,
            d12.se,
            if win { "" } else { " not significant" },
            d10.diff,
            d10.se
        );
    }
    rep.line("C7 WAIC prefers sub1 over sub2", wins >= 8, format!("{wins} of 10 seeds with elpd_diff > 2·se (need 8), {:.1?}", start.elapsed()));
}

fn c9_trend_test(rep: &mut Report) {
    let start = Instant::now();
    let trend_area = 5;
    let seeds = 20u64;
    let mut hits = 0;
    let mut flat_counts = vec![0usize; 16];
    for seed in 1..=seeds {
        let population = generate_population(&PopulationConfig {
            seed,
            grid: 20,
            partition: AreaPartition::Blocks { side: 5 },
            sigma2_w: 0.0,
            sigma2_y: 1.0,
            covariate: CovariateSurface::Constant(20.0),
            injected_trends: vec![(trend_area, 0.5)],
            ..Default::default()
        })
        .unwrap();
        let sizes = vec![20; population.index.len()];
        let table = draw_replicate(&population, &sizes, seed, 0).unwrap();
        let graph = population.area_graph().unwrap();
        let sampler = SamplerConfig { seed, ..desk_sampler() };
        let fit = fit_model(&table, &Covariates::none(), Some(&graph), default_spec(Variant::Sub1, 0, PriorConfig::default()), &sampler, 0.95, (0, 7)).unwrap();
        hits += fit.theta_excludes_zero[trend_area] as usize;
        for (a, &ex) in fit.theta_excludes_zero.iter().enumerate() {
            if a != trend_area && ex {
                flat_counts[a] += 1;
            }
        }
    }
    let n_flat = flat_counts.len() - 1;
    let mean_flat = flat_counts.iter().sum::<usize>() as f64 / n_flat as f64;
    let max_flat = *flat_counts.iter().max().unwrap();
    rep.line(
        "C9 trend hypothesis test",
        hits >= 18 && mean_flat <= 2.0,
        format!(
            "trend area excluded zero in {hits} of {seeds} seeds (need 18); flat areas excluded zero in {mean_flat:.2} of {seeds} on average (max {max_flat}, need ≤ 2), {:.1?}",
            start.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c10_determinism(rep: &mut Report) {
    let population = generate_population(&PopulationConfig {
        grid: 20,
        partition: AreaPartition::Blocks { side: 5 },
        ..Default::default()
    })
    .unwrap();
    let mut sizes = synthetic_sample_sizes(population.index, 12, &[6], 2);
    sizes[3] = 1;
    let table = draw_replicate(&population, &sizes, 2, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let labels = PanelLabels {
        areas: (1..=population.n_areas()).map(|a| a.to_string()).collect(),
        times: (1..=population.index.n_times() as i64).collect(),
    };
    let panel_path = dir.path().join("panel.csv");
    write_panel_csv(std::fs::File::create(&panel_path).unwrap(), &table, &population.area_covariate(), &labels).unwrap();
    let panel = load_panel_csv(&panel_path, true).unwrap();
    let graph = population.area_graph().unwrap();
    let spec = ModelSpec::new(Variant::Full, vec![0], PriorConfig::default());
    let model = Model::new(panel.table.clone(), panel.covariates.clone(), Some(graph), spec).unwrap();
    let sampler = SamplerConfig {
        n_chains: 2,
        iterations: 600,
        burn_in: 200,
        thin: 2,
        seed: 99,
        ..Default::default()
    };
    let a = run_chains(&model, &sampler).unwrap();
    let b = run_chains(&model, &sampler).unwrap();
    let bits = |d: &stfh::PosteriorDraws| d.records().concat().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let same_draws = bits(&a) == bits(&b) && a.acceptance == b.acceptance;

    let options = EmitOptions {
        change_pair: Some((1, 6)),
        ..Default::default()
    };
    let (out_a, out_b, out_c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (d, out) in [(&a, &out_a), (&b, &out_b)] {
        std::fs::create_dir_all(out).unwrap();
        emit_results(d, &panel, &options, out).unwrap();
    }
    let same_outputs = read_dir_bytes(&out_a) == read_dir_bytes(&out_b);

    let mut dump = Vec::new();
    write_draws(&a, &mut dump).unwrap();
    let reloaded = read_draws(dump.as_slice()).unwrap();
    std::fs::create_dir_all(&out_c).unwrap();
    emit_results(&reloaded, &panel, &options, &out_c).unwrap();
    let same_reload = bits(&reloaded) == bits(&a) && read_dir_bytes(&out_a) == read_dir_bytes(&out_c);
    let n_files = read_dir_bytes(&out_a).len();
    rep.line(
        "C10 determinism and dump round trip",
        same_draws && same_outputs && same_reload,
        format!("rerun draws identical: {same_draws}; {n_files} output files identical: {same_outputs}; reload identical: {same_reload}"),
    );
}

fn main() {
    let mut rep = Report { failures: 0 };
    let start = Instant::now();
    c1_kernels(&mut rep);
    c2_ar1(&mut rep);
    c3_conjugacy(&mut rep);
    c4_targets(&mut rep);
    c5_prior_weighting(&mut rep);
    c6_c8_desk_study(&mut rep);
    c7_waic(&mut rep);
    c9_trend_test(&mut rep);
    c10_determinism(&mut rep);
    println!("acceptance: {} failing, {:.1?} total", rep.failures, start.elapsed());
    if rep.failures > 0 {
        std::process::exit(1);
    }
}
