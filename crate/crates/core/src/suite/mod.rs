//! Scenario configuration, the verification registry and the suite runner.

mod checks;
mod config;
mod run;

pub use checks::{cellular, commutator, member_on, run_entry, CheckContext};
pub use config::{EvolutionSpec, GridSpec, ScenarioConfig, SuiteEntry};
pub use run::{context, run_suite, thread_cap, write_outcome, Artifact, ArtifactWriter, EntryOutcome, SuiteOutcome};
