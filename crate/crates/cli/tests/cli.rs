//! End-to-end runs of the `porestab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use porestab_cli::config::{RunConfig, Scenario};
use porestab_cli::manifest::sha256_hex;

const BIN: &str = env!("CARGO_BIN_EXE_porestab");

fn example(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    fs::read_to_string(path).unwrap()
}

/// Write `config` into `dir` and run `command` on it with output into `dir/out`.
fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let output = Command::new(BIN)
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    (output, out)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_analyze() -> String {
    example("ab_analyze.toml").replace("n_r = 12", "n_r = 4").replace("n_z = 12", "n_z = 4").replace("n_theta = 12", "n_theta = 8")
}

fn manifest(out: &Path) -> toml::Table {
    fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(porestab::CSV_HEADER));
    lines.map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn analyze_default_config_is_stable_and_inventoried() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run(tmp.path(), "analyze", &small_analyze(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: toml::Table = fs::read_to_string(out.join("report.toml")).unwrap().parse().unwrap();
    assert_eq!(report["verdict"].as_str(), Some("stable-by-criterion"));
    assert_eq!(report["nontrivial_inflow"].as_bool(), Some(true));
    let m = manifest(&out);
    assert_eq!(m["status"].as_str(), Some("complete"));
    assert_eq!(m["verdicts"]["stability"].as_str(), Some("stable-by-criterion"));
    let files = m["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["report.toml", "eigenvalues.csv", "energy.csv", "probe.csv"]);
    for f in files {
        let bytes = fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
    let header = &csv_rows(&out.join("eigenvalues.csv"))[0];
    assert_eq!(header, &["re", "im", "residual"]);
}

#[test]
fn zero_flow_flags_missing_inflow() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run(tmp.path(), "analyze", &small_analyze().replace("w_max = 1.0", "w_max = 0.0"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: toml::Table = fs::read_to_string(out.join("report.toml")).unwrap().parse().unwrap();
    assert_eq!(report["nontrivial_inflow"].as_bool(), Some(false));
    assert_eq!(report["verdict"].as_str(), Some("criterion-inconclusive"));
}

#[test]
fn negative_rate_is_a_validation_error_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run(tmp.path(), "analyze", &small_analyze().replace("kappa_f = 0.3", "kappa_f = -0.3"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("species.kappa_f"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_keys_and_wrong_subcommand_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = small_analyze().replace("kappa_b = 0.3", "kappa_b = 0.3\nkapa_b = 0.3");
    let (o, _) = run(tmp.path(), "analyze", &typo, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kapa_b"), "{}", stderr(&o));
    let (o, _) = run(tmp.path(), "simulate", &small_analyze(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario.kind"));
}

#[test]
fn config_round_trip_is_identity() {
    for name in ["ab_analyze.toml", "ab_simulate.toml", "poincare.toml", "sweep_height.toml", "sweep_kappa.toml"] {
        let cfg = RunConfig::from_toml(&example(name)).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again, "{name}");
    }
}

#[test]
fn identical_runs_give_identical_csv() {
    let cfg = example("ab_simulate.toml").replace("t_end = 60.0", "t_end = 2.0");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (oa, out_a) = run(a.path(), "simulate", &cfg, &["--seed", "7"]);
    let (ob, out_b) = run(b.path(), "simulate", &cfg, &["--seed", "7"]);
    assert!(oa.status.success() && ob.status.success());
    for f in ["trajectory.csv", "ledger.csv", "decay.toml"] {
        assert_eq!(fs::read(out_a.join(f)).unwrap(), fs::read(out_b.join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    let (oc, out_c) = run(c.path(), "simulate", &cfg, &["--seed", "8"]);
    assert!(oc.status.success());
    assert_ne!(fs::read(out_a.join("trajectory.csv")).unwrap(), fs::read(out_c.join("trajectory.csv")).unwrap());
}

#[test]
fn simulate_fits_the_spectral_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run(tmp.path(), "simulate", &example("ab_simulate.toml"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d: toml::Table = fs::read_to_string(out.join("decay.toml")).unwrap().parse().unwrap();
    assert_eq!(d["status"].as_str(), Some("fitted"));
    let ratio = d["ratio"].as_float().unwrap();
    assert!((0.8..=1.2).contains(&ratio), "ratio {ratio}");
    assert!(d["max_ledger_residual"].as_float().unwrap() <= 1e-9);
    let rows = csv_rows(&out.join("trajectory.csv"));
    assert_eq!(rows[0], ["t", "bulk_mass_0", "bulk_mass_1", "surface_mass_0", "surface_mass_1", "deviation"]);
}

#[test]
fn zero_perturbation_reports_insufficient_decay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = example("ab_simulate.toml").replace("t_end = 60.0", "t_end = 1.0").replace("delta = 1e-3", "delta = 0.0");
    let (o, out) = run(tmp.path(), "simulate", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d: toml::Table = fs::read_to_string(out.join("decay.toml")).unwrap().parse().unwrap();
    assert_eq!(d["status"].as_str(), Some("insufficient-decay"));
    assert_eq!(manifest(&out)["status"].as_str(), Some("complete"));
}

#[test]
fn oversized_step_fails_before_stepping() {
    // the bound at unit wall values is 0.5 / 0.6
    let tmp = tempfile::tempdir().unwrap();
    let cfg = example("ab_simulate.toml").replace("dt = 0.01", "dt = 1.0");
    let (o, out) = run(tmp.path(), "simulate", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("explicit reaction bound"), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["status"].as_str(), Some("incomplete"));
    assert!(m["files"].as_array().unwrap().is_empty());
}

#[test]
fn height_sweep_follows_the_poincare_pattern() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = example("sweep_height.toml")
        .replace("n_z = 6", "n_z = 12")
        .replace("values = [0.5, 1.0, 2.0]", "values = [0.5, 1.0, 2.0, 4.0]");
    let (o, out) = run(tmp.path(), "sweep", &cfg, &["--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("sweep.csv"));
    assert_eq!(rows[0], ["height", "criterion_lhs", "criterion_rhs", "spectral_gap", "verdict", "error"]);
    let heights: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(heights, [0.5, 1.0, 2.0, 4.0]);
    for r in &rows[1..] {
        let h: f64 = r[0].parse().unwrap();
        let rhs: f64 = r[2].parse().unwrap();
        let oracle = (1.0f64).min(std::f64::consts::PI.powi(2) / (h * h)).sqrt();
        assert!((rhs - oracle).abs() / oracle < 0.02, "h={h}: {rhs} vs {oracle}");
        assert!(r[5].is_empty());
    }
}

#[test]
fn kappa_sweep_tracks_the_verdict_transition() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run(tmp.path(), "sweep", &example("sweep_kappa.toml"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("sweep.csv"));
    let lhs: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    let rhs: f64 = rows[1][2].parse().unwrap();
    assert!(lhs.windows(2).all(|w| w[1] > w[0]));
    // A <-> 2B at balance: |a||b| = |a|^2 kappa_f with |a|^2 = 5
    for (r, l) in rows[1..].iter().zip(&lhs) {
        let kf: f64 = r[0].parse().unwrap();
        assert!((l - 5.0 * kf).abs() <= 1e-12 * l);
        let expect = if *l <= rhs { "stable-by-criterion" } else { "criterion-inconclusive" };
        assert_eq!(r[4], expect);
    }
    let verdicts: Vec<&str> = rows[1..].iter().map(|r| r[4].as_str()).collect();
    assert!(verdicts.contains(&"stable-by-criterion") && verdicts.contains(&"criterion-inconclusive"));
}

#[test]
fn sweep_records_failed_points_and_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = example("sweep_kappa.toml").replace("values = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6]", "values = [0.1, -1.0, 0.15]");
    let (o, out) = run(tmp.path(), "sweep", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2][4], "error");
    assert!(rows[2][5].contains("kappa_f"));
    assert_eq!(rows[3][4], "stable-by-criterion");
}

#[test]
fn empty_axis_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = example("sweep_kappa.toml").replace("values = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6]", "values = []");
    let (o, _) = run(tmp.path(), "sweep", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario.axes[0].values"), "{}", stderr(&o));
    let cfg = example("sweep_kappa.toml").replace("max_points = 16", "max_points = 3");
    assert!(matches!(RunConfig::from_toml(&cfg), Err(e) if e.exit_code() == 2));
}

#[test]
fn poincare_refinement_improves() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run(tmp.path(), "poincare", &example("poincare.toml"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("poincare.csv"));
    let errs: Vec<f64> = rows[1..].iter().map(|r| r[5].parse().unwrap()).collect();
    assert_eq!(errs.len(), 3);
    assert!(errs[1] < 0.02 && errs[0] > errs[1] && errs[1] > errs[2]);
    assert!(matches!(RunConfig::from_toml(&example("poincare.toml")).unwrap().scenario, Scenario::Poincare { .. }));
}
