use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use sqg_lab::lp::besov_norm;
use sqg_lab::spectral::snapshot;
use sqg_lab::suite::{member_on, ScenarioConfig, SuiteEntry};

fn sqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqg-lab"))
        .args(args)
        .env("SQG_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sqg(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small grid and a short run so each command finishes quickly.
fn small_config(dir: &Path, suite: Vec<SuiteEntry>) -> std::path::PathBuf {
    let mut cfg = ScenarioConfig {
        suite,
        ..ScenarioConfig::default()
    };
    cfg.grid.n = 32;
    cfg.grid.length = 2.0 * std::f64::consts::PI * 4.0;
    cfg.evolution.t_end = 0.1;
    cfg.evolution.snapshot_every = 5;
    let path = dir.join("cfg.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    path
}

fn check_manifest(dir: &Path) {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let arts = v["artifacts"].as_array().unwrap();
    assert!(!arts.is_empty());
    for a in arts {
        let bytes = std::fs::read(dir.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"], hex::encode(Sha256::digest(&bytes)));
        assert_eq!(a["bytes"], bytes.len());
    }
}

#[test]
fn config_prints_the_default_suite() {
    let text = ok(&["config"]);
    let cfg = ScenarioConfig::from_toml(&text).unwrap();
    assert_eq!(cfg, ScenarioConfig::default_suite());
}

#[test]
fn simulate_writes_snapshots_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), Vec::new());
    let out = tmp.path().join("sim");
    ok(&["simulate", "--config", s(&cfg), "--member", "bump-0", "--out", s(&out)]);
    let snaps: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "sqgf"))
        .collect();
    assert_eq!(snaps.len(), 3);
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    check_manifest(&out);

    let first = snapshot::read(&out.join("snap_00000.sqgf")).unwrap();
    let loaded = ScenarioConfig::load(&cfg).unwrap();
    let expected = member_on(loaded.seed, loaded.grid.build().unwrap(), "bump-0").unwrap();
    assert!(first.field.max_abs_diff(&expected) < 1e-12);
}

#[test]
fn field_text_roundtrip_is_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), Vec::new());
    let snap = tmp.path().join("a.sqgf");
    ok(&[
        "field",
        "generate",
        "--member",
        "steep_front-1",
        "--config",
        s(&cfg),
        "--out",
        s(&snap),
    ]);
    let text = ok(&["field", "dump", "--input", s(&snap)]);
    assert!(text.starts_with("# n=32"));
    let txt = tmp.path().join("a.txt");
    std::fs::write(&txt, text).unwrap();
    let back = tmp.path().join("b.sqgf");
    ok(&["field", "load", "--input", s(&txt), "--out", s(&back)]);
    assert_eq!(std::fs::read(&snap).unwrap(), std::fs::read(&back).unwrap());
}

#[test]
fn besov_matches_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), Vec::new());
    let snap = tmp.path().join("a.sqgf");
    ok(&[
        "field",
        "generate",
        "--member",
        "random_band-2",
        "--config",
        s(&cfg),
        "--out",
        s(&snap),
    ]);
    let u = snapshot::read(&snap).unwrap().field;
    let v: serde_json::Value = serde_json::from_str(&ok(&[
        "besov",
        "--input",
        s(&snap),
        "--s",
        "-0.5",
        "--p",
        "inf",
        "--m",
        "2",
    ]))
    .unwrap();
    let expected = besov_norm(&u, -0.5, f64::INFINITY, 2.0).unwrap().value;
    assert_eq!(v["method"], "dyadic");
    assert!((v["value"].as_f64().unwrap() - expected).abs() <= 1e-14 * expected);
    let fd: serde_json::Value = serde_json::from_str(&ok(&[
        "besov",
        "--input",
        s(&snap),
        "--s",
        "0.5",
        "--p",
        "2",
        "--m",
        "2",
        "--fd",
    ]))
    .unwrap();
    assert_eq!(fd["method"], "finite_difference");
    assert!(fd["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn moc_certify_and_monitor() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("moc");
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["moc", "certify", "--points", "200", "--out", s(&out)])).unwrap();
    assert_eq!(v["certified"], true);
    check_manifest(&out);

    // amplitude small enough for the modulus to dominate the data
    let cfg = small_config(tmp.path(), Vec::new());
    let loaded = ScenarioConfig::load(&cfg).unwrap();
    let u = member_on(0, loaded.grid.build().unwrap(), "bump-0").unwrap();
    let small = u.scale(0.0025 / u.sup_norm());
    let init = tmp.path().join("small.sqgf");
    snapshot::write(&init, &small, 0.0).unwrap();
    let sim = tmp.path().join("sim");
    ok(&["simulate", "--config", s(&cfg), "--input", s(&init), "--out", s(&sim)]);
    let csv = ok(&["moc", "monitor", "--traj", s(&sim)]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,B,argmax_distance,pairs"));
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|&b| b < 1.0));
}

#[test]
fn verify_runs_one_entry_and_rejects_unknown_names() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), Vec::new());
    let out = tmp.path().join("v");
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["verify", "spectral", "--config", s(&cfg), "--out", s(&out)])).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    check_manifest(&out);

    let bad = sqg(&["verify", "nope"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope"));
}

#[test]
fn suite_exit_code_reflects_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let good = small_config(tmp.path(), vec![SuiteEntry::default_for("spectral").unwrap()]);
    let out = tmp.path().join("good");
    let summary = ok(&["suite", "--config", s(&good), "--out", s(&out)]);
    assert!(summary.contains("2/2 passed"), "{summary}");
    check_manifest(&out);

    let strict = SuiteEntry::Spectral { tol: 0.0 };
    let bad = small_config(tmp.path(), vec![strict]);
    let r = sqg(&["suite", "--config", s(&bad), "--out", s(&tmp.path().join("bad"))]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn config_errors_name_the_location() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, "seed = 0\n[grid]\nn = \"large\"\n").unwrap();
    let r = sqg(&["suite", "--config", s(&path)]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("line 3"), "{err}");
}
