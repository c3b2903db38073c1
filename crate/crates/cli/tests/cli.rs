use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wavemap_core::cauchy::oracle_41;

fn wavemap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavemap"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn goursat_table_reports_the_flag_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemap(dir.path(), &["goursat-table", "--frame", "H1hat"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("goursat.json"));
    assert_eq!(v["m"], serde_json::json!([3, 5, 7, 8]));
    assert_eq!(v["goursat"], Value::Bool(true));
}

#[test]
fn solve_cauchy_csv_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemap(
        dir.path(),
        &["solve-cauchy", "--example", "example41", "--rect", "0,1,0,1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("cauchy.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,u,v,u1,u2,status,residual"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[6], "regular");
        let p: Vec<f64> = f[..4].iter().map(|s| s.parse().unwrap()).collect();
        let (u, v) = oracle_41(p[0], p[1]).unwrap();
        assert!((p[2] - u).abs() <= 1e-7 && (p[3] - v).abs() <= 1e-7, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 41 * 41);
    assert!(text.contains("\r\n"));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[solve-cauchy]\nexampel = \"example41\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let cases: &[&[&str]] = &[
        &["--config", cfg, "solve-cauchy"],
        &["--config", "/nonexistent/wavemap.toml", "goursat-table"],
        &["curvature", "--metric", "nope"],
        &["weierstrass", "--k", "s^3+", "--h", "s", "--m", "t", "--f", "t"],
        &["--tol", "-1", "superpose"],
        &["solve-cauchy", "--rect", "0,1,0"],
        &["solve-cauchy", "--example", "example41", "--phi1", "x"],
        &["goursat-table", "--probes", "2"],
        &["figure", "--scenario", "lambda", "--cfl", "1.5"],
        &["verify-all", "--criteria", "15"],
        &["no-such-command"],
    ];
    for args in cases {
        let o = wavemap(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn failed_verification_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemap(dir.path(), &["--tol", "1e-300", "weierstrass", "--n", "3"]);
    assert_eq!(code(&o), 1);
    let v = json(&dir.path().join("weierstrass.json"));
    assert_eq!(v["passed"], Value::Bool(false));
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&a, "11"), (&b, "11"), (&c, "12")] {
        for args in [
            &["superpose", "--n", "8"][..],
            &["weierstrass", "--n", "4"],
            &["goursat-table"],
        ] {
            let mut full = vec!["--seed", seed];
            full.extend_from_slice(args);
            assert_eq!(code(&wavemap(dir.path(), &full)), 0);
        }
    }
    for name in [
        "superpose.csv",
        "superpose.json",
        "weierstrass.csv",
        "weierstrass.json",
        "goursat.json",
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let x = std::fs::read(a.path().join("superpose.csv")).unwrap();
    let z = std::fs::read(c.path().join("superpose.csv")).unwrap();
    assert_ne!(x, z);
}

#[test]
fn flags_override_the_configuration_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 3\n[solve-cauchy]\nexample = \"example42\"\nrect = [0.5, 1.5, 0.5, 1.5]\ngrid = [5, 4]\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = wavemap(dir.path(), &["--config", cfg, "solve-cauchy"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("cauchy.json"));
    assert_eq!(v["data"], "example42");
    assert_eq!(v["samples"], 20);
    let o = wavemap(dir.path(), &["--config", cfg, "solve-cauchy", "--grid", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&dir.path().join("cauchy.json"))["samples"], 9);
}

#[test]
fn custom_expressions_and_simulation_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemap(
        dir.path(),
        &[
            "solve-cauchy",
            "--phi1",
            "1-x",
            "--phi2",
            "2*x",
            "--psi1",
            "0",
            "--psi2",
            "0",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("cauchy.json"));
    assert_eq!(v["data"], "custom");
    assert!(v["oracle_error"].is_null());

    let o = wavemap(
        dir.path(),
        &["simulate", "--d-xi", "0.05", "--duration", "0.5", "--snapshots", "3"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(dir.path().join("simulate.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    let run = json(&dir.path().join("simulate.json"));
    assert_eq!(run["status"]["status"], "finished");
}

#[test]
fn verify_all_writes_a_seeded_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemap(dir.path(), &["--seed", "7", "verify-all", "--criteria", "5,6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let v = json(&dir.path().join("report.json"));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| !c["anchor"].as_str().unwrap().is_empty()));
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemap(dir.path(), &["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("goursat-table"));
}
