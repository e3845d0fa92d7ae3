//! Littlewood–Paley blocks, Besov norms and space–time norms.

mod bernstein;
mod besov;
mod mixed;
mod partition;

pub use bernstein::{
    ball_supported, bernstein_constant, bernstein_probe, check_support, derivative_norm, ring_supported,
    BernsteinConstant, Support,
};
pub use besov::{besov_norm, besov_norm_fd, fd_normalization, lm_norm, parse_exponent, BesovNorm, BlockTerm, FdBesov};
pub use mixed::{mixed_norm, time_norm, BlockSeries, MixedVariant};
pub use partition::{build_partition, chi, phi, ring_bounds, smooth_step, Decomposition, DyadicBlock, DyadicPartition};
