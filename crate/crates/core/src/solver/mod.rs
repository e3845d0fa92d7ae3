//! Time integration of the dissipative QG equation and of the linear
//! transport–diffusion problem, with the diagnostics the estimates need.

mod config;
mod kernel;
mod monitors;
mod picard;
mod trajectory;

pub use config::{EvolutionConfig, Forcing, Integrator};
pub use monitors::{
    blowup_monitor, blowup_proxy, fit_smoothing_constant, fit_thm2_constant, max_principle_drift, max_principle_report,
    smoothing_measure, smoothing_monitor, td_scenarios, thm2_measure, thm2_ratio, SmoothingMeasurement, TdScenario,
    Thm2Measurement,
};
pub use picard::{choose_horizon, picard_iterate, small_data_lhs, PicardConfig, PicardRun, PicardState};
pub use trajectory::{run, run_td, step_qg, step_td, Diagnostics, RunKind, Trajectory};
