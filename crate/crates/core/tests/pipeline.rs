use std::fs;

use stfh::io::{emit_results, load_adjacency, load_aggregates, load_panel_csv, load_priors, write_panel_csv, EmitOptions, PanelLabels};
use stfh::mcmc::{read_draws, write_draws};
use stfh::posterior::{compare, waic_from_draws};
use stfh::sim::{draw_replicate, generate_population, synthetic_sample_sizes, AreaPartition, Population, PopulationConfig};
use stfh::{run_chains, MissClass, Model, ModelSpec, SamplerConfig, Variant};

fn small_population() -> Population {
    generate_population(&PopulationConfig {
        grid: 15,
        partition: AreaPartition::Blocks { side: 5 },
        n_times: 4,
        seed: 8,
        ..Default::default()
    })
    .unwrap()
}

fn short_sampler(seed: u64) -> SamplerConfig {
    SamplerConfig {
        n_chains: 2,
        iterations: 400,
        burn_in: 100,
        thin: 3,
        seed,
        ..Default::default()
    }
}

fn labels(pop: &Population) -> PanelLabels {
    PanelLabels {
        areas: (1..=pop.n_areas()).map(|a| format!("A{a:02}")).collect(),
        times: (0..pop.index.n_times() as i64).map(|t| 2001 + t).collect(),
    }
}

#[test]
fn simulated_panel_fits_and_summarizes() {
    let pop = small_population();
    let mut sizes = synthetic_sample_sizes(pop.index, 10, &[4], 3);
    sizes[0] = 1;
    let table = draw_replicate(&pop, &sizes, 3, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let labels = labels(&pop);

    let panel_path = dir.path().join("panel.csv");
    write_panel_csv(fs::File::create(&panel_path).unwrap(), &table, &pop.area_covariate(), &labels).unwrap();
    let adjacency: String = pop
        .adjacency_edges()
        .iter()
        .map(|&(a, b)| format!("{} {}\n", labels.areas[a - 1], labels.areas[b - 1]))
        .collect();
    let adj_path = dir.path().join("adjacency.txt");
    fs::write(&adj_path, format!("# rook adjacency\n{adjacency}")).unwrap();
    let agg_path = dir.path().join("groups.csv");
    fs::write(&agg_path, "group,area_id,area_size\nnorth,A01,10\nnorth,A02,30\nall,A05,1\n").unwrap();
    let prior_path = dir.path().join("priors.toml");
    fs::write(&prior_path, "shape = 2.5\nb_eps = 0.5\n").unwrap();

    let panel = load_panel_csv(&panel_path, true).unwrap();
    assert_eq!(panel.labels, labels);
    assert_eq!(panel.table.cells()[0].class, MissClass::SinglePlot);
    assert_eq!(panel.table.count(MissClass::NoPlots), sizes.iter().filter(|&&n| n == 0).count());
    let graph = load_adjacency(&adj_path, &panel.labels, false).unwrap();
    assert!(graph.added.is_empty());
    let priors = load_priors(&prior_path).unwrap();
    assert_eq!(priors.shape, 2.5);

    let mut reports = Vec::new();
    for variant in [Variant::Full, Variant::Sub1, Variant::Sub2] {
        let svc = if variant == Variant::Full { vec![0] } else { vec![] };
        let g = variant.is_spatial().then(|| graph.graph.clone());
        let model = Model::new(panel.table.clone(), panel.covariates.clone(), g, ModelSpec::new(variant, svc, priors.clone())).unwrap();
        let draws = run_chains(&model, &short_sampler(4)).unwrap();
        assert_eq!(draws.len(), 2 * 100);
        let report = waic_from_draws(&draws, panel.table.cells()).unwrap();
        assert!(report.waic.is_finite());
        assert_eq!(report.pointwise.len(), panel.table.count(MissClass::Observed));
        reports.push((variant.as_str().to_string(), report));

        let options = EmitOptions {
            aggregates: load_aggregates(&agg_path, &panel.labels).unwrap(),
            ..Default::default()
        };
        let out = dir.path().join(variant.as_str());
        emit_results(&draws, &panel, &options, &out).unwrap();
        let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 1 + pop.index.len());
        assert!(summary.lines().nth(1).unwrap().starts_with("A01,2001,1,"));
        assert!(!summary.contains("NaN"));
        let trend = fs::read_to_string(out.join("trend.csv")).unwrap();
        assert_eq!(trend.lines().count(), 1 + pop.n_areas());
        let agg = fs::read_to_string(out.join("aggregates.csv")).unwrap();
        assert!(agg.lines().any(|l| l.starts_with("north,")));
        let params = fs::read_to_string(out.join("parameters.csv")).unwrap();
        assert!(params.contains("sigma2_eps"));
    }
    let rows = compare(&reports);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].elpd_diff, 0.0);
}

#[test]
fn dump_file_round_trip() {
    let pop = small_population();
    let sizes = vec![6; pop.index.len()];
    let table = draw_replicate(&pop, &sizes, 1, 0).unwrap();
    let model = Model::new(table, stfh::Covariates::none(), None, ModelSpec::new(Variant::Sub2, vec![], Default::default())).unwrap();
    let draws = run_chains(&model, &short_sampler(9)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.bin");
    write_draws(&draws, fs::File::create(&path).unwrap()).unwrap();
    let back = read_draws(fs::File::open(&path).unwrap()).unwrap();
    assert_eq!((&back.layout, &back.chain, back.records()), (&draws.layout, &draws.chain, draws.records()));

    let bytes = fs::read(&path).unwrap();
    assert!(read_draws(&bytes[..bytes.len() - 3]).is_err());
}

#[test]
fn bad_inputs_are_reported() {
    let pop = small_population();
    let dir = tempfile::tempdir().unwrap();
    let labels = labels(&pop);
    let adj = dir.path().join("adj.txt");
    fs::write(&adj, "A01 A99\n").unwrap();
    assert!(load_adjacency(&adj, &labels, false).is_err());
    let priors = dir.path().join("p.toml");
    fs::write(&priors, "shape = -1\n").unwrap();
    assert!(load_priors(&priors).is_err());
    fs::write(&priors, "no_such_prior = 1\n").unwrap();
    assert!(load_priors(&priors).is_err());
    let panel = dir.path().join("panel.csv");
    fs::write(&panel, "area_id,time,n,mu_hat,sigma2_hat\na,1,2,oops,1\n").unwrap();
    let err = load_panel_csv(&panel, false).unwrap_err().to_string();
    assert!(err.contains("2"), "{err}");
}
