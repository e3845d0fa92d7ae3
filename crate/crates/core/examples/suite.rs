//! A small scenario file run through the suite runner, with outputs and
//! manifest written to a temporary directory.

use sqg_lab::suite::{run_suite, write_outcome, ScenarioConfig};

const CONFIG: &str = r#"
seed = 7
output_dir = "out"

[grid]
n = 64
length = 50.26548245743669

[evolution]
dt = 0.01
t_end = 0.5

[[suite]]
name = "spectral"

[[suite]]
name = "semigroup"
qs = [-2, -1, 0]

[[suite]]
name = "max_principle"
members = ["bump-0", "steep_front-1"]
t_end = 0.5

[[suite]]
name = "determinism"
"#;

fn main() -> sqg_lab::Result<()> {
    let cfg = ScenarioConfig::from_toml(CONFIG)?;
    let outcome = run_suite(&cfg)?;
    print!("{}", outcome.summary());
    let dir = std::env::temp_dir().join("sqg-lab-suite-example");
    let manifest = write_outcome(&outcome, &cfg, &dir)?;
    println!("manifest: {}", manifest.display());
    println!("exit code would be {}", outcome.exit_code());
    Ok(())
}
