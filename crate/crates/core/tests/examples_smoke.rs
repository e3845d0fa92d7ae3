//! Builds every cargo example and runs it once.

use std::process::Command;

fn example_binaries() -> Vec<(String, String)> {
    let out = Command::new(env!("CARGO"))
        .args(["build", "--examples", "-p", "sqg-lab", "--message-format=json"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("cargo runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .filter_map(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .filter(|m| m["reason"] == "compiler-artifact" && m["target"]["kind"][0] == "example")
        .filter_map(|m| {
            Some((
                m["target"]["name"].as_str()?.to_string(),
                m["executable"].as_str()?.to_string(),
            ))
        })
        .collect()
}

#[test]
fn every_example_runs() {
    let bins = example_binaries();
    let names: Vec<&str> = bins.iter().map(|b| b.0.as_str()).collect();
    for expected in ["spectral_operators", "littlewood_paley", "critical_run", "suite"] {
        assert!(names.contains(&expected), "missing example {expected}: {names:?}");
    }
    for (name, exe) in &bins {
        let out = Command::new(exe)
            .env("SQG_THREADS", "1")
            .output()
            .expect("example starts");
        assert!(
            out.status.success(),
            "example {name} failed:\n{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stdout.is_empty(), "example {name} printed nothing");
    }
}
