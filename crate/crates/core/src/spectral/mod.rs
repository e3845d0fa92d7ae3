//! Periodic grids, fields and Fourier multipliers.

mod fft;
mod field;
mod grid;
pub mod integral;
mod multiplier;
mod ops;
pub mod snapshot;

pub use fft::Fft2;
pub(crate) use field::lp_norm_of;
pub use field::Field;
pub use grid::Grid2D;
pub use integral::{fractional_laplacian_integral, IntegralLaplacian, IntegralOutput};
pub use multiplier::{apply_multiplier, Multiplier};
pub(crate) use ops::check_alpha;
pub use ops::{advection, dealiased_product, operator_norm, semigroup_apply, velocity_from_theta, VectorField};
