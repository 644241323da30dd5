use std::process::Command;

use bpinterp::datagen::{gen_instance, FeatureDistribution, InstanceConfig};
use bpinterp::experiments::{csv, run_fig1a, theory_rate, Estimator, ExperimentConfig, Scale};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bpinterp"))
}

#[test]
fn noise_does_not_depend_on_the_feature_law() {
    let xi: Vec<Vec<f64>> = FeatureDistribution::ALL
        .iter()
        .map(|&dist| gen_instance(&InstanceConfig::new(20, 50, 1.0, dist, 9, 2)).unwrap().xi)
        .collect();
    assert_eq!(xi[0], xi[1]);
    assert_eq!(xi[1], xi[2]);
}

#[test]
fn noiseless_sweep_recovers_exactly() {
    let mut cfg = ExperimentConfig::fig1a(Scale::Small);
    cfg.n = 25;
    cfg.d_grid = vec![100, 200, 400];
    cfg.sigma2_grid = vec![0.0];
    cfg.runs = 3;
    for r in run_fig1a(&cfg).unwrap() {
        assert_eq!(r.estimator, Estimator::BP);
        assert!(r.err_l2sq <= 1e-8, "{r:?}");
    }
}

#[test]
fn theory_rate_column_and_thread_invariance() {
    let mut cfg = ExperimentConfig::fig1a(Scale::Small);
    cfg.n = 15;
    cfg.d_grid = vec![60, 120];
    cfg.runs = 2;
    cfg.threads = 1;
    let a = run_fig1a(&cfg).unwrap();
    for r in &a {
        let expect = r.sigma2 / (r.d as f64 / r.n as f64).ln();
        assert!((r.theory_rate - expect).abs() <= 1e-15 * expect);
        assert_eq!(r.theory_rate, theory_rate(r.n, r.d, r.sigma2));
    }
    cfg.threads = 5;
    assert_eq!(csv::to_csv_string(&a), csv::to_csv_string(&run_fig1a(&cfg).unwrap()));
}

#[test]
fn cli_exit_codes() {
    let ok = bin().args(["quantile", "--s", "400", "--d", "20000"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("PASS"));

    let pv = bin().args(["path-verify", "--d", "6", "--seeds", "4"]).output().unwrap();
    assert_eq!(pv.status.code(), Some(0));

    let missing = bin().args(["fig1a", "--config", "/nonexistent/cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let bad = bin().args(["solve", "--dist", "cauchy"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn aux_verify_failure_is_exit_two() {
    // The default-ρ band check fails at desk scale; the CLI must say so.
    let out = bin().args(["aux-verify", "--n", "100", "--d", "5000", "--draws", "10"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    let expect = if text.trim_end().ends_with("PASS") { 0 } else { 2 };
    assert_eq!(out.status.code(), Some(expect));
}

#[test]
fn cli_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# tiny sweep\nn = 10\nd = 40,80\nruns = 1\ndist = normal\n").unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["fig1a", "--config", cfg.to_str().unwrap(), "--runs", "2", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let recs = csv::read_csv(&out.join("fig1a_records.csv")).unwrap();
    assert_eq!(recs.len(), 4);
    assert!(recs.iter().all(|r| r.n == 10));
    let svg = std::fs::read_to_string(out.join("fig1a.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.attribute("stroke-dasharray").is_some()).count(), 1);
}
