//! Modulus-of-continuity machinery: the two-piece `ω`, the functionals `Ω`
//! and `I`, the negativity scan, the choice of `λ`, and a breach monitor for
//! simulated fields.

mod certify;
mod functionals;
mod lambda;
mod monitor;
mod omega;

pub use certify::{certify_negativity, MoCReport};
pub use functionals::{dissipation_I, omega_Omega};
pub use lambda::{choose_lambda, LambdaChoice, C0_GRID_MAX};
pub use monitor::{moc_breach_monitor, BreachSample, BreachSampling};
pub use omega::ModulusOfContinuity;
