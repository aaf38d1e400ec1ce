use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stfh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stfh")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = stfh(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_fit_summarize_waic_score() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&[
        "simulate", "--grid", "15", "--area-side", "5", "--times", "4", "--replicates", "2", "--max-n", "10", "--empty-areas", "5",
        "--seed", "3", "--fit-models", "sub2", "--chains", "2", "--iters", "300", "--burnin", "100", "--thin", "2", "--out", p(&sim),
    ]);
    for f in ["truth_mu.csv", "truth_theta.csv", "adjacency.txt", "sample_sizes.csv", "estimates_mu.csv", "scores_mu.csv", "waic.csv"] {
        assert!(sim.join(f).exists(), "{f} missing");
    }
    let data = sim.join("replicates/replicate_000.csv");
    let adjacency = sim.join("adjacency.txt");

    let fit_args = |model: &str, out: &Path| -> Vec<String> {
        [
            "fit", "--data", p(&data), "--adjacency", p(&adjacency), "--model", model, "--chains", "2", "--iters", "300", "--burnin",
            "100", "--thin", "2", "--seed", "7", "--standardize", "--change", "2,4", "--dump-draws", "--out", p(out),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let full = dir.path().join("full");
    let sub2 = dir.path().join("sub2");
    for (model, out) in [("full", &full), ("sub2", &sub2)] {
        let args = fit_args(model, out);
        ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
        for f in ["summary.csv", "parameters.csv", "trend.csv", "change.csv", "waic.csv", "pointwise.csv", "meta.json", "draws.bin"] {
            assert!(out.join(f).exists(), "{model}: {f} missing");
        }
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(full.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["model"], "full");
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);

    let again = dir.path().join("again");
    let resum = dir.path().join("resummarized");
    ok(&fit_args("full", &again).iter().map(String::as_str).collect::<Vec<_>>());
    ok(&["summarize", "--draws", p(&full.join("draws.bin")), "--data", p(&data), "--change", "2,4", "--out", p(&resum)]);
    for f in ["summary.csv", "parameters.csv", "trend.csv", "change.csv", "pointwise.csv", "meta.json"] {
        assert_eq!(fs::read(full.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "rerun changed {f}");
    }
    for f in ["summary.csv", "trend.csv", "change.csv", "pointwise.csv"] {
        assert_eq!(fs::read(full.join(f)).unwrap(), fs::read(resum.join(f)).unwrap(), "summarize changed {f}");
    }

    let table = ok(&["waic", p(&full), p(&sub2)]);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "model,elpd,waic,elpd_diff,se_diff");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",0,0"));

    let rescored = dir.path().join("rescored.csv");
    ok(&["score", "--truth", p(&sim.join("truth_mu.csv")), "--estimates", p(&sim.join("estimates_mu.csv")), "--out", p(&rescored)]);
    assert_eq!(fs::read_to_string(&rescored).unwrap(), fs::read_to_string(sim.join("scores_mu.csv")).unwrap());
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("panel.csv");
    fs::write(&data, "area_id,time,n,mu_hat,sigma2_hat\na,1,3,1.0,0.5\nb,1,3,2.0,0.5\n").unwrap();
    let out = dir.path().join("out");

    let r = stfh(&["fit", "--data", p(&data), "--model", "sub1", "--out", p(&out)]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("--adjacency"));

    let r = stfh(&["fit", "--data", p(&data), "--model", "sub2", "--iters", "100", "--burnin", "50", "--thin", "3", "--out", p(&out)]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).starts_with("error:"));

    let r = stfh(&["fit", "--data", p(&dir.path().join("absent.csv")), "--model", "sub2", "--out", p(&out)]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("absent.csv"));

    let r = stfh(&["simulate", "--grid", "80", "--out", p(&out)]);
    assert!(!r.status.success());
}
