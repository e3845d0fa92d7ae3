use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::checks::{run_entry, CheckContext};
use super::config::{ScenarioConfig, SuiteEntry};
use crate::error::{Error, Result};
use crate::report::{summary_table, VerificationReport};

/// Outcome of one configured entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryOutcome {
    pub name: String,
    pub reports: Vec<VerificationReport>,
    /// Set when the entry crashed; reports produced before the crash are
    /// not recoverable, so `reports` is then empty.
    pub error: Option<String>,
    pub seconds: f64,
}

impl EntryOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.reports.is_empty() && self.reports.iter().all(|r| r.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub seed: u64,
    pub entries: Vec<EntryOutcome>,
}

impl SuiteOutcome {
    pub fn reports(&self) -> Vec<VerificationReport> {
        self.entries.iter().flat_map(|e| e.reports.iter().cloned()).collect()
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(EntryOutcome::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn summary(&self) -> String {
        let mut out = summary_table(&self.reports());
        for e in &self.entries {
            if let Some(err) = &e.error {
                out.push_str(&format!("{}: CRASHED: {err}\n", e.name));
            }
        }
        out
    }
}

/// Worker count from `SQG_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("SQG_THREADS").ok()?.parse().ok().filter(|&n| n > 0)
}

pub fn context(cfg: &ScenarioConfig) -> Result<CheckContext> {
    cfg.validate()?;
    Ok(CheckContext {
        grid: cfg.grid.build()?,
        seed: cfg.seed,
        evolution: cfg.evolution.build(),
    })
}

fn run_one(entry: &SuiteEntry, ctx: &CheckContext) -> EntryOutcome {
    let start = std::time::Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| run_entry(entry, ctx)));
    let (reports, error) = match result {
        Ok(Ok(r)) => (r, None),
        Ok(Err(e)) => (Vec::new(), Some(e.to_string())),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (Vec::new(), Some(format!("panic: {msg}")))
        }
    };
    EntryOutcome {
        name: entry.name().to_string(),
        reports,
        error,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn run_entries(entries: &[&SuiteEntry], ctx: &CheckContext) -> Vec<EntryOutcome> {
    entries.par_iter().map(|e| run_one(e, ctx)).collect()
}

/// Runs every entry of `cfg` in a worker pool capped by `SQG_THREADS`.
/// Results come back in configuration order. A `determinism` entry reruns
/// all other entries and compares the serialized reports byte for byte.
pub fn run_suite(cfg: &ScenarioConfig) -> Result<SuiteOutcome> {
    let ctx = context(cfg)?;
    let work = || {
        let plain: Vec<&SuiteEntry> = cfg.suite.iter().filter(|e| **e != SuiteEntry::Determinism).collect();
        let first = run_entries(&plain, &ctx);
        let check = cfg
            .suite
            .contains(&SuiteEntry::Determinism)
            .then(|| determinism(&plain, &ctx, &first));
        let mut by_order = first.into_iter();
        cfg.suite
            .iter()
            .map(|e| match e {
                SuiteEntry::Determinism => check.clone().expect("computed when configured"),
                _ => by_order.next().expect("one outcome per entry"),
            })
            .collect::<Vec<_>>()
    };
    let entries = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config {
                path: "SQG_THREADS".into(),
                msg: e.to_string(),
            })?
            .install(work),
        None => work(),
    };
    Ok(SuiteOutcome {
        seed: cfg.seed,
        entries,
    })
}

/// Reruns `plain` and compares the serialized reports with `first`.
fn determinism(plain: &[&SuiteEntry], ctx: &CheckContext, first: &[EntryOutcome]) -> EntryOutcome {
    let start = std::time::Instant::now();
    let second = run_entries(plain, ctx);
    let bytes = |es: &[EntryOutcome]| -> Vec<Vec<u8>> {
        es.iter()
            .map(|e| serde_json::to_vec(&(&e.reports, &e.error)).expect("reports serialize"))
            .collect()
    };
    let (a, b) = (bytes(first), bytes(&second));
    let differing: Vec<&str> = first
        .iter()
        .zip(a.iter().zip(&b))
        .filter(|(_, (x, y))| x != y)
        .map(|(e, _)| e.name.as_str())
        .collect();
    let report = VerificationReport::new(
        "bit-identical rerun",
        "determinism",
        &ctx.grid,
        differing.len() as f64,
        0.0,
        differing.is_empty() && !plain.is_empty(),
    )
    .with_seed(ctx.seed)
    .with_detail("entries", plain.len())
    .with_detail("differing", &differing);
    EntryOutcome {
        name: "determinism".into(),
        reports: vec![report],
        error: None,
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files under one directory and records their hashes; `finish`
/// writes `manifest.json`.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            dir,
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf> {
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&serde_json::json!({ "artifacts": self.artifacts }))?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// `reports.json` (all reports), `outcomes.json` (per entry, with errors
/// and timings), `summary.txt`, `config.toml` and the manifest.
pub fn write_outcome(outcome: &SuiteOutcome, cfg: &ScenarioConfig, dir: &Path) -> Result<PathBuf> {
    let mut w = ArtifactWriter::new(dir)?;
    w.write(
        "reports.json",
        serde_json::to_string_pretty(&outcome.reports())?.as_bytes(),
    )?;
    w.write(
        "outcomes.json",
        serde_json::to_string_pretty(&outcome.entries)?.as_bytes(),
    )?;
    w.write("summary.txt", outcome.summary().as_bytes())?;
    w.write("config.toml", cfg.to_toml().as_bytes())?;
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;

    fn tiny(suite: Vec<SuiteEntry>) -> ScenarioConfig {
        let g = Grid2D::new(32, 2.0 * std::f64::consts::PI * 4.0).unwrap();
        let mut cfg = ScenarioConfig {
            suite,
            ..ScenarioConfig::default()
        };
        cfg.grid.n = g.n();
        cfg.grid.length = g.length();
        cfg
    }

    #[test]
    fn empty_suite_passes() {
        let out = run_suite(&tiny(Vec::new())).unwrap();
        assert!(out.entries.is_empty());
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn crash_is_recorded_and_fails() {
        let bad = SuiteEntry::Blowup {
            member: "no_such-0".into(),
            t_end: 0.1,
            eps0: 0.1,
        };
        let out = run_suite(&tiny(vec![SuiteEntry::default_for("spectral").unwrap(), bad])).unwrap();
        assert!(out.entries[0].passed());
        assert!(out.entries[1].error.is_some());
        assert_eq!(out.exit_code(), 1);
        assert!(out.summary().contains("CRASHED"));
    }

    #[test]
    fn determinism_entry_compares_reruns() {
        let cfg = tiny(vec![
            SuiteEntry::Determinism,
            SuiteEntry::default_for("spectral").unwrap(),
            SuiteEntry::default_for("semigroup").unwrap(),
        ]);
        let out = run_suite(&cfg).unwrap();
        assert_eq!(out.entries[0].name, "determinism");
        assert!(out.entries[0].passed(), "{:?}", out.entries[0]);
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn manifest_lists_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(vec![SuiteEntry::default_for("spectral").unwrap()]);
        let out = run_suite(&cfg).unwrap();
        let m = write_outcome(&out, &cfg, dir.path()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
        let arts = v["artifacts"].as_array().unwrap();
        assert_eq!(arts.len(), 4);
        let bytes = std::fs::read(dir.path().join("reports.json")).unwrap();
        let rep = arts.iter().find(|a| a["path"] == "reports.json").unwrap();
        assert_eq!(rep["sha256"], hex::encode(Sha256::digest(&bytes)));
    }
}
