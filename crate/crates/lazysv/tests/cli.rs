use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lazysv::Report;

fn lazysv(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lazysv"));
    cmd.args(args).env_remove("LAZYSV_GRID_CAP").env_remove("LAZYSV_ENUM_BUDGET").env_remove("LAZYSV_FOURIER_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn atom_prints_exact_rho() {
    let o = lazysv(&["atom", "--w", "1,1", "--mu", "0.5"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "rho=0.375"), "{}", stdout(&o));
}

#[test]
fn atom_over_fp_routes_agree() {
    let dp = lazysv(&["atom", "--w", "1,2,3", "--mu", "0.3", "--p", "7"], &[]);
    let ft = lazysv(&["atom", "--w", "1,2,3", "--mu", "0.3", "--p", "7", "--algorithm", "fourier"], &[]);
    let rho = |o: &Output| -> f64 {
        stdout(o).lines().find_map(|l| l.strip_prefix("rho=")).unwrap().parse().unwrap()
    };
    assert!((rho(&dp) - rho(&ft)).abs() < 1e-12);
}

#[test]
fn verify_fp_small_exits_zero() {
    let o = lazysv(&["verify", "--suite", "fp-small"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("failed=0"));
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"schema_version": 1, "command": "atom", "params": {"w": [1, 1], "muu": 0.5}}"#,
    );
    let o = lazysv(&["--config", &cfg, "run"], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("muu"), "{}", stderr(&o));
}

#[test]
fn malformed_config_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let wrong_version = write_config(dir.path(), r#"{"schema_version": 7, "command": "atom", "params": {}}"#);
    let o = lazysv(&["--config", &wrong_version, "run"], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schema_version"), "{}", stderr(&o));

    let bad_budget = write_config(
        dir.path(),
        r#"{"schema_version": 1, "command": "atom", "params": {}, "budgets": {"grid_kap": 5}}"#,
    );
    let o = lazysv(&["--config", &bad_budget, "run"], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid_kap"), "{}", stderr(&o));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"schema_version": 1, "command": "atom", "params": {"w": [1, 1], "mu": 0.1}}"#,
    );
    let from_file = lazysv(&["--config", &cfg, "run"], &[]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    assert!(stdout(&from_file).contains("rho=0.81"));
    let overridden = lazysv(&["--config", &cfg, "atom", "--mu", "0.5"], &[]);
    assert!(stdout(&overridden).lines().any(|l| l == "rho=0.375"));
    let mismatch = lazysv(&["--config", &cfg, "lcd", "--w", "1,2"], &[]);
    assert_eq!(mismatch.status.code(), Some(1));
}

#[test]
fn budget_exceeded_exits_three() {
    let o = lazysv(&["atom", "--w", "50,50", "--mu", "0.5"], &[("LAZYSV_GRID_CAP", "10")]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = lazysv(&["verify", "--suite", "fp-small"], &[("LAZYSV_ENUM_BUDGET", "10")]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn argument_errors_and_help() {
    assert_eq!(lazysv(&["--help"], &[]).status.code(), Some(0));
    assert_eq!(lazysv(&["--version"], &[]).status.code(), Some(0));
    assert_eq!(lazysv(&["atom", "--nope", "1"], &[]).status.code(), Some(1));
    assert_eq!(lazysv(&["atom", "--mu", "0.5"], &[]).status.code(), Some(1));
    assert_eq!(lazysv(&["atom", "--w", "1", "--mu", "1.5"], &[]).status.code(), Some(1));
}

const TAIL: &[&str] = &["tail", "--n", "8", "--mu", "0.4", "--eta", "0.01,0.05,0.2", "--trials", "1000", "--seed", "3"];

fn tail_into(dir: &Path, workers: &str) -> Output {
    let mut args = vec!["--out-dir", dir.to_str().unwrap(), "--workers", workers];
    args.extend_from_slice(TAIL);
    lazysv(&args, &[])
}

#[test]
fn tail_report_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(tail_into(a.path(), "1").status.code(), Some(0));
    assert_eq!(tail_into(b.path(), "3").status.code(), Some(0));
    for f in ["tail.csv", "tail.json"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        // the JSON echoes no worker count, so both files must match
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn tail_rows_match_eta_grid() {
    let dir = tempfile::tempdir().unwrap();
    tail_into(dir.path(), "2");
    let csv = fs::read_to_string(dir.path().join("tail.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,mu,eta,p_hat,ci_lo,ci_hi,bound,trials,seed"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    tail_into(dir.path(), "2");
    let bytes = fs::read(dir.path().join("tail.json")).unwrap();
    let report = Report::from_json(&bytes).unwrap();
    assert_eq!(report.to_json(), bytes);
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.rows.len(), 3);
    let csv = fs::read(dir.path().join("tail.csv")).unwrap();
    assert_eq!(report.to_csv().unwrap(), csv);
}

#[test]
fn replay_reports_verdict_and_crossover() {
    let o = lazysv(&["replay", "--n", "1000000", "--n-lo", "2", "--n-hi", "5000"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("verdict=false"));
    assert!(out.contains("crossover_stable=true"));
}

#[test]
fn other_subcommands_run() {
    let runs: &[&[&str]] = &[
        &["sample", "--mu", "0.2", "--count", "5"],
        &["sample", "--n", "4", "--model", "gaussian"],
        &["lcd", "--a", "1,0,0"],
        &["rk", "--a", "1,2,3,4", "--p", "5", "--k", "2", "--beta", "0.5"],
        &["levelset", "--a", "1,2,3", "--p", "7", "--t", "0.1,1"],
        &["halasz", "--count", "2"],
        &["spectral-norm", "--n", "20", "--trials", "20"],
        &["edelman", "--n", "10", "--trials", "500"],
        &["calibrate", "--bound", "wt-atom"],
        &["verify", "--suite", "lcd"],
    ];
    for args in runs {
        let o = lazysv(args, &[]);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
}
