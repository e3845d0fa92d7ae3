//! Commutators with Littlewood–Paley blocks, regularized flow maps, and the
//! composition estimates built on them.

mod commutator;
mod composition;
mod flow;
mod interp;

pub use commutator::{
    commutator_block, commutator_estimate_sweep, commutator_ratio, commutator_self_sweep, CommutatorReport,
};
pub use composition::{
    compose, fit_flow_commutator_constant, fit_loglog, flow_commutator, flow_commutator_q_sweep,
    flow_commutator_report, flow_commutator_v_sweep, vishik_probe, vishik_sweep, Composed, Composition, FlowCommutator,
    ScalingFit, VishikSweep, BAND_LEAK_WARNING,
};
pub use flow::{integrate_flow, FlowMap, FlowOptions, VelocitySeries};
