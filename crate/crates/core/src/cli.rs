//! Command-line front end. Every command writes its primary result to
//! stdout; commands that take `--out` also write files there together with
//! a `manifest.json` of hashes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lp::{besov_norm, besov_norm_fd, parse_exponent};
use crate::moc::{certify_negativity, choose_lambda, moc_breach_monitor, BreachSampling, ModulusOfContinuity};
use crate::report::VerificationReport;
use crate::solver::{picard_iterate, run, PicardConfig};
use crate::spectral::{snapshot, Field, Grid2D};
use crate::suite::{
    commutator, context, member_on, run_suite, write_outcome, ArtifactWriter, ScenarioConfig, SuiteEntry,
};

#[derive(Debug, Parser)]
#[command(name = "sqg-lab", version, about = "Dissipative SQG laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the critical equation and write snapshots plus diagnostics.csv.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Picard iteration for the transport-diffusion scheme.
    Picard {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon0: f64,
    },
    /// Dyadic (or finite-difference) Besov norm of a snapshot.
    Besov {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, value_parser = exponent)]
        p: f64,
        #[arg(long, value_parser = exponent)]
        m: f64,
        #[arg(long)]
        fd: bool,
    },
    /// Run one registered verification and print its reports as JSON.
    Verify {
        /// One of the suite entry names, e.g. thm2, vishik, flowcomm.
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Modulus-of-continuity tools.
    Moc {
        #[command(subcommand)]
        command: MocCommand,
    },
    /// Snapshot conversion and synthesis.
    Field {
        #[command(subcommand)]
        command: FieldCommand,
    },
    /// Run every entry of a scenario file (default: the full suite).
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default scenario file.
    Config,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Scenario file providing seed, grid and evolution settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Standard-corpus member used as initial data.
    #[arg(long, default_value = "random_band-0", conflicts_with = "input")]
    pub member: String,
    /// Snapshot used as initial data instead of a corpus member.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MocCommand {
    /// Scan the negativity criterion; JSON to stdout, CSV to --out.
    Certify {
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        #[arg(long, default_value_t = 1e-4)]
        gamma: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 2000)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Breach statistic B(t) over the snapshots of a simulate directory.
    Monitor {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        #[arg(long, default_value_t = 1e-4)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum FieldCommand {
    /// Snapshot to text: a `# n= L= t=` line, then n rows of n samples.
    Dump {
        #[arg(long)]
        input: PathBuf,
    },
    /// Text produced by `dump` back to a snapshot.
    Load {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a standard-corpus member as a snapshot.
    Generate {
        #[arg(long)]
        member: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exponent(s: &str) -> std::result::Result<f64, String> {
    parse_exponent(s).map_err(|e| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p),
        None => Ok(ScenarioConfig::default_suite()),
    }
}

fn initial(source: &Source, cfg: &ScenarioConfig) -> Result<Field> {
    match &source.input {
        Some(p) => Ok(snapshot::read(p)?.field),
        None => member_on(cfg.seed, cfg.grid.build()?, &source.member),
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(v)?))
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate { source, out } => {
            let cfg = load_config(source.config.as_deref())?;
            let theta0 = initial(&source, &cfg)?;
            let tr = run(&theta0, &cfg.evolution.build())?;
            let mut w = ArtifactWriter::new(&out)?;
            for (i, (t, u)) in tr.times.iter().zip(&tr.states).enumerate() {
                w.write(&format!("snap_{i:05}.sqgf"), &snapshot::encode(u, *t))?;
            }
            w.write("diagnostics.csv", tr.diagnostics_csv().as_bytes())?;
            w.write("config.toml", cfg.to_toml().as_bytes())?;
            w.finish()?;
            emit(&format!(
                "{} snapshots to t={} in {} (halvings {}, blowup {:?})\n",
                tr.states.len(),
                tr.t_end(),
                out.display(),
                tr.halvings,
                tr.blowup
            ))?;
            Ok(0)
        }
        Command::Picard {
            source,
            n_max,
            epsilon0,
        } => {
            let cfg = load_config(source.config.as_deref())?;
            let theta0 = initial(&source, &cfg)?;
            let pc = PicardConfig {
                epsilon0,
                ..PicardConfig::default()
            };
            let r = picard_iterate(&theta0, &pc, n_max)?;
            let bound = r.states.iter().map(|s| s.iterate_bound).fold(0.0, f64::max);
            let worst = r.states.iter().filter_map(|s| s.ratio).fold(0.0, f64::max);
            let pass = r.contraction && r.small_data_lhs <= epsilon0 && bound <= 2.0 * epsilon0;
            let report = VerificationReport::new("picard", "picard-contraction", theta0.grid(), worst, pc.eta, pass)
                .with_seed(cfg.seed)
                .with_constant("horizon", r.horizon)
                .with_detail("states", &r.states)
                .with_detail("converged", r.converged);
            print_json(&vec![report])?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Besov { input, s, p, m, fd } => {
            let u = snapshot::read(&input)?.field;
            let value = if fd {
                let r = besov_norm_fd(&u, s, p, m)?;
                json!({ "value": r.value, "per_block": [], "method": "finite_difference", "raw": r.raw })
            } else {
                let r = besov_norm(&u, s, p, m)?;
                json!({ "value": r.value, "per_block": r.per_block, "method": "dyadic" })
            };
            print_json(&value)?;
            Ok(0)
        }
        Command::Verify { name, config, out } => {
            let base = load_config(config.as_deref())?;
            let entry = base
                .suite
                .iter()
                .find(|e| e.name() == name)
                .cloned()
                .map_or_else(|| SuiteEntry::default_for(&name), Ok)?;
            if let SuiteEntry::Commutator { s, bound } = &entry {
                let (reports, sweeps) = commutator(&context(&base)?, s, *bound)?;
                print_json(&sweeps)?;
                return Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 });
            }
            let cfg = ScenarioConfig {
                suite: vec![entry],
                ..base
            };
            let outcome = run_suite(&cfg)?;
            if let Some(dir) = out {
                write_outcome(&outcome, &cfg, &dir)?;
            }
            match &outcome.entries[0].error {
                Some(e) => eprintln!("{name} failed to run: {e}"),
                None => print_json(&outcome.reports())?,
            }
            Ok(outcome.exit_code())
        }
        Command::Moc { command } => moc(command),
        Command::Field { command } => field(command),
        Command::Suite { config, out } => {
            let cfg = load_config(config.as_deref())?;
            let outcome = run_suite(&cfg)?;
            let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            write_outcome(&outcome, &cfg, &dir)?;
            emit(&outcome.summary())?;
            Ok(outcome.exit_code())
        }
        Command::Config => {
            emit(&ScenarioConfig::default_suite().to_toml())?;
            Ok(0)
        }
    }
}

fn moc(command: MocCommand) -> Result<i32> {
    match command {
        MocCommand::Certify {
            delta,
            gamma,
            c,
            points,
            out,
        } => {
            let moc = ModulusOfContinuity::new(delta, gamma)?;
            let r = certify_negativity(&moc, c, (1e-6, 1e6), points)?;
            if let Some(dir) = out {
                let mut w = ArtifactWriter::new(dir)?;
                w.write("moc.csv", r.csv().as_bytes())?;
                w.write("moc.json", serde_json::to_string_pretty(&r)?.as_bytes())?;
                w.finish()?;
            }
            print_json(&r)?;
            Ok(if r.certified { 0 } else { 1 })
        }
        MocCommand::Monitor {
            traj,
            delta,
            gamma,
            seed,
        } => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&traj)
                .map_err(|e| Error::io(&traj, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "sqgf"))
                .collect();
            paths.sort();
            let snaps = paths.iter().map(|p| snapshot::read(p)).collect::<Result<Vec<_>>>()?;
            let first = snaps.first().ok_or(Error::EmptyTrajectory)?;
            let moc = ModulusOfContinuity::new(delta, gamma)?;
            let lc = choose_lambda(&moc, first.field.sup_norm(), first.field.grad_sup())?;
            let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
            let states: Vec<Field> = snaps.into_iter().map(|s| s.field).collect();
            let sampling = BreachSampling {
                seed,
                ..BreachSampling::default()
            };
            let samples = moc_breach_monitor(&times, &states, &moc, lc.lambda, lc.c0, &sampling)?;
            let mut csv = String::from("t,B,argmax_distance,pairs\n");
            for s in &samples {
                let _ = writeln!(csv, "{:e},{:e},{:e},{}", s.t, s.b, s.argmax_distance, s.pairs);
            }
            emit(&csv)?;
            Ok(if samples.iter().all(|s| s.b < 1.0) { 0 } else { 1 })
        }
    }
}

/// Text form used by `field dump` and `field load`.
pub fn dump_text(u: &Field, t: f64) -> String {
    let g = u.grid();
    let n = g.n();
    let mut s = format!("# n={} L={} t={}\n", n, g.length(), t);
    for row in u.physical().chunks(n) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn parse_text(text: &str) -> Result<(Field, f64)> {
    let bad = |msg: String| Error::Format(msg);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty field text".into()))?;
    let mut n = None;
    let mut length = None;
    let mut t = None;
    for tok in header.trim_start_matches('#').split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| bad(format!("bad header token `{tok}`")))?;
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("bad header value `{tok}`")));
        match k {
            "n" => n = Some(num(v)? as usize),
            "L" => length = Some(num(v)?),
            "t" => t = Some(num(v)?),
            _ => return Err(bad(format!("unknown header key `{k}`"))),
        }
    }
    let (n, length, t) = match (n, length, t) {
        (Some(n), Some(l), Some(t)) => (n, l, t),
        _ => return Err(bad("header needs n, L and t".into())),
    };
    let grid = Grid2D::new(n, length)?;
    let samples = lines
        .filter(|l| !l.trim().is_empty())
        .flat_map(|l| l.split(','))
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("bad sample `{v}`"))))
        .collect::<Result<Vec<_>>>()?;
    if samples.len() != grid.len() {
        return Err(bad(format!("expected {} samples, found {}", grid.len(), samples.len())));
    }
    Ok((Field::from_physical(grid, samples)?, t))
}

fn field(command: FieldCommand) -> Result<i32> {
    match command {
        FieldCommand::Dump { input } => {
            let s = snapshot::read(&input)?;
            emit(&dump_text(&s.field, s.t))?;
        }
        FieldCommand::Load { input, out } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
            let (u, t) = parse_text(&text)?;
            snapshot::write(&out, &u, t)?;
        }
        FieldCommand::Generate { member, config, out } => {
            let cfg = load_config(config.as_deref())?;
            let u = member_on(cfg.seed, cfg.grid.build()?, &member)?;
            snapshot::write(&out, &u, 0.0)?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip_is_exact() {
        let g = Grid2D::new(16, 7.5).unwrap();
        let u = Field::from_fn(g, |x, y| (x * 0.8).sin() * (y * 1.6).cos() / 3.0).unwrap();
        let (back, t) = parse_text(&dump_text(&u, 0.25)).unwrap();
        assert_eq!(t, 0.25);
        assert!(u
            .physical()
            .iter()
            .zip(back.physical())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(parse_text("# n=16 L=7.5\n").is_err());
    }

    #[test]
    fn cli_parses_spec_commands() {
        let parse = |args: &[&str]| Cli::try_parse_from(std::iter::once("sqg-lab").chain(args.iter().copied()));
        assert!(parse(&["besov", "--input", "a", "--s", "-0.5", "--p", "inf", "--m", "1", "--fd"]).is_ok());
        assert!(parse(&["verify", "thm2"]).is_ok());
        assert!(parse(&["moc", "certify", "--delta", "0.01", "--gamma", "1e-4", "--C", "2"]).is_ok());
        assert!(parse(&["moc", "monitor", "--traj", "d"]).is_ok());
        assert!(parse(&["field", "dump", "--input", "a"]).is_ok());
        assert!(parse(&["simulate", "--config", "c.toml", "--out", "o"]).is_ok());
        assert!(parse(&["besov", "--input", "a", "--s", "0", "--p", "0.5", "--m", "1"]).is_err());
    }
}
