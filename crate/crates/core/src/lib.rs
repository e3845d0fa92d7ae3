//! Numerical laboratory for the dissipative surface quasi-geostrophic
//! equation on the periodic square.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod estimates;
pub mod lp;
pub mod moc;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
pub use spectral::{Field, Grid2D, Multiplier, VectorField};
