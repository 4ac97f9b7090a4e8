use std::path::Path;
use std::process::Command;

use mflow_cli::{main_with, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use serde_json::Value;

fn mflow(args: &[&str], out: &Path) -> i32 {
    let mut all = vec!["mflow"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", out.to_str().unwrap()]);
    main_with(all)
}

fn summary(out: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(out.join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn identities_on_the_torus_pass() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mflow(&["identities", "--manifold", "torus", "--n", "64"], dir.path()), EXIT_PASS);
    let s = summary(dir.path(), "identities");
    assert_eq!(s["pass"], Value::Bool(true));
    assert_eq!(s["config"]["n"], 64);
    assert_eq!(s["config"]["manifold"], "torus");
    let checks = s["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "adjointness"));
    assert!(checks.iter().all(|c| c["pass"] == Value::Bool(true)));
}

#[test]
fn solve_writes_the_energy_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let code = mflow(
        &["solve", "--manifold", "torus", "--init", "stream-bump", "--n", "24", "--dt", "0.01", "--T", "0.05"],
        dir.path(),
    );
    assert_eq!(code, EXIT_PASS);
    let csv = std::fs::read_to_string(dir.path().join("ledger.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,E,G,Dd,Ddef,W"));
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[5][0] - 0.05).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]), "energy must not grow without forcing");
    assert_eq!(summary(dir.path(), "solve")["config"]["t_final"], 0.05);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mflow(&["identities", "--manifold", "klein"], dir.path()), EXIT_USAGE);
    assert_eq!(mflow(&["integrate"], dir.path()), EXIT_USAGE);
    assert_eq!(mflow(&["solve", "--viscosity", "laplace"], dir.path()), EXIT_USAGE);
    assert_eq!(mflow(&["solve", "--dt=-1"], dir.path()), EXIT_USAGE);
    assert_eq!(mflow(&["restriction", "--a", "2"], dir.path()), EXIT_USAGE);
    assert!(!dir.path().join("identities.json").exists());
}

#[test]
fn failed_checks_exit_with_one() {
    // Killing data decays at 4a² under the Hodge operator, not 2a².
    let dir = tempfile::tempdir().unwrap();
    let code = mflow(&["solve", "--manifold", "sphere", "--n", "24", "--T", "0.01", "--nu", "0.5"], dir.path());
    let s = summary(dir.path(), "solve");
    let rate = s["decay"]["rate"].as_f64().unwrap();
    let want = s["expectation"]["rate"].as_f64().unwrap();
    assert_eq!(want, 4.0);
    // ν = 0.5 halves the rate, so the check against ν = 1 must fail
    assert!((rate - 2.0).abs() < 0.5, "{rate}");
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(s["pass"], Value::Bool(false));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sphere run\nmanifold = sphere\nn = 32\na = 2\nseed = 9\n").unwrap();
    let code = mflow(&["sphere-norms", "--config", cfg.to_str().unwrap(), "--n", "40"], dir.path());
    assert_eq!(code, EXIT_PASS);
    let s = summary(dir.path(), "sphere-norms");
    assert_eq!(s["config"]["n"], 40);
    assert_eq!(s["config"]["a"], 2.0);
    assert_eq!(s["config"]["seed"], 9);

    std::fs::write(&cfg, "resolution = 32\n").unwrap();
    assert_eq!(mflow(&["sphere-norms", "--config", cfg.to_str().unwrap()], dir.path()), EXIT_USAGE);
}

#[test]
fn binary_reports_and_exits() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mflow"))
        .args(["identities", "--manifold", "klein", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown manifold: klein"));

    let out = Command::new(env!("CARGO_BIN_EXE_mflow")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let help = String::from_utf8_lossy(&out.stdout);
    for sub in ["identities", "sphere-norms", "counterexample", "solve", "restriction"] {
        assert!(help.contains(sub), "{help}");
    }
}
