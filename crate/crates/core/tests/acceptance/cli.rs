use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use addspline::io::{read_table, RunReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_addspline"))
}

fn ozone() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ozone.csv")
}

fn fit(out: &Path, extra: &[&str]) -> Output {
    bin()
        .args(["fit", "--y", "ozone", "--x1", "temperature", "--x2", "wind", "--data"])
        .arg(ozone())
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn fit_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = fit(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert!(r.convergence.converged);
    assert!(r.sigma2_hat > 0.0);
    for name in ["component1_temperature.csv", "component2_wind.csv"] {
        let (h, rows) = read_table(&dir.path().join(name)).unwrap();
        assert_eq!(h, ["x", "x_original", "estimate", "lower", "upper"]);
        assert_eq!(rows.len(), 201);
        assert!(rows.iter().flatten().all(|v| v.is_finite()));
    }
}

#[test]
fn rerun_is_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    fit(a.path(), &[]);
    fit(b.path(), &[]);
    for name in ["component1_temperature.csv", "component2_wind.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
    let (mut ra, mut rb) = (report(a.path()), report(b.path()));
    ra.timings = rb.timings.clone();
    assert_eq!(ra, rb);
    rb.timings.total_seconds += 1.0;
    assert_ne!(ra, rb);
}

#[test]
fn zero_penalty_on_ozone() {
    // Warned about, then refused: the scaled covariates leave the low end of
    // the unit interval empty, so the unpenalized systems are singular.
    let dir = tempfile::tempdir().unwrap();
    let out = fit(dir.path(), &["--lambda1", "0", "--lambda2", "0"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("singular"), "{err}");
    assert!(err.contains("not positive definite"), "{err}");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_convergence_exits_two_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = fit(dir.path(), &["--max-stages", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert!(!r.convergence.converged);
    assert_eq!(r.convergence.stages, 2);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin()
        .args(["fit", "--y", "ozone", "--x1", "temperature", "--x2", "humidity", "--data"])
        .arg(ozone())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("humidity"));

    let bad = dir.path().join("bad.csv");
    let text = std::fs::read_to_string(ozone()).unwrap().replacen("\n41,", "\nNA,", 1);
    std::fs::write(&bad, text).unwrap();
    let out = bin()
        .args(["fit", "--y", "ozone", "--x1", "temperature", "--x2", "wind", "--data"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 1, column 'ozone'"));

    let out = bin().args(["fit", "--data"]).arg(ozone()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["fit", "--kn", "many"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fit.cfg");
    std::fs::write(&cfg, "# tuning\nkn = 8\nlambda1 = 2\nlevel = 0.9\n").unwrap();
    let out = fit(dir.path(), &["--kn", "9", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r.tuning.num_intervals, 9);
    assert_eq!(r.tuning.lambda1, 2.0);
    assert_eq!(r.config.level, 0.9);

    std::fs::write(&cfg, "knots = 8\n").unwrap();
    let out = fit(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn svg_has_component_and_band_paths() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fit.svg");
    let out = fit(dir.path(), &["--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(svg).unwrap();
    assert_eq!(text.matches("<path").count(), 6);
}

fn simulate(dir: &Path, args: &[&str]) -> Output {
    bin().arg("simulate").args(args).arg("--out").arg(dir).output().unwrap()
}

#[test]
fn simulate_sim3_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), &["sim3", "--n", "1000", "--reps", "1000", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_table(&dir.path().join("sim3_n1000_seed42.csv")).unwrap();
    assert_eq!(h, ["replication", "z1", "z2"]);
    assert_eq!(rows.len(), 1000);
    assert!(dir.path().join("sim3_n1000_seed42.json").exists());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("sim3 n=1000 M=1000"));
}

#[test]
fn simulate_coverage_and_sim1() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), &["coverage", "--level", "0.95", "--n", "300", "--reps", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let js: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("coverage_n300_seed42.json")).unwrap()).unwrap();
    let cov = js["coverage"].as_array().unwrap();
    assert_eq!(cov.len(), 2);
    assert!(cov.iter().all(|c| (0.0..=1.0).contains(&c.as_f64().unwrap())));

    let out = simulate(dir.path(), &["sim1", "--n", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = read_table(&dir.path().join("sim1_n1000_seed42.csv")).unwrap();
    assert_eq!(rows.len(), 201);
}

#[test]
fn unknown_scenario_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), &["sim4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sim4"));
}
