//! Singular-integral form of `|D|^{1/2}`:
//!
//! `|D|^{1/2} u(x) = C ∫ (u(x) - u(y)) / |x - y|^{5/2} dy`
//!
//! evaluated as a periodic lattice sum. The kernel is periodized over image
//! boxes, the far field beyond the last image ring is integrated
//! analytically, and the cell containing `y = x` is patched with the local
//! quadratic expansion of `u`. The constant `C` is fitted once per grid.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::Fft2;
use super::field::Field;
use super::grid::Grid2D;
use super::multiplier::{apply_multiplier, Multiplier};
use crate::error::{Error, Result};
use crate::quadrature::{Quadrature, QuadratureResult};

/// Number of image rings summed explicitly around the fundamental box.
const IMAGE_RINGS: i64 = 12;

/// Relative energy above the band that counts as real content, not FFT noise.
const ABOVE_CUTOFF_TOL: f64 = 1e-24;

#[derive(Clone, Debug)]
pub struct IntegralLaplacian {
    grid: Grid2D,
    /// `n² · FFT(K)`: the lattice-summed kernel in Fourier space.
    kernel_hat: Vec<Complex64>,
    /// `Σ_{h≠0} K(h) dA` plus the analytic far field.
    diagonal: f64,
    /// Weight of `-Δu` from the singular cell.
    cell_weight: f64,
    constant: f64,
}

#[derive(Clone, Debug)]
pub struct IntegralOutput {
    pub field: Field,
    /// Input carried energy outside the 2/3-rule band.
    pub above_cutoff: bool,
    pub constant: f64,
}

impl IntegralLaplacian {
    /// Builds the lattice operator and fits `C` on a Gaussian bump against
    /// the spectral `|D|^{1/2}`.
    pub fn calibrated(grid: Grid2D) -> Result<Self> {
        let mut op = Self::unnormalized(grid)?;
        let bump = calibration_bump(grid)?;
        let raw = op.apply_raw(&bump)?;
        let target = apply_multiplier(&bump, Multiplier::FracLap(0.5))?;
        let num: f64 = raw.physical().iter().zip(target.physical()).map(|(a, b)| a * b).sum();
        let den: f64 = raw.physical().iter().map(|a| a * a).sum();
        op.constant = num / den;
        Ok(op)
    }

    /// Shared calibrated operator for `grid`.
    pub fn cached(grid: Grid2D) -> Result<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64), IntegralLaplacian>>> = OnceLock::new();
        let key = (grid.n(), grid.length().to_bits());
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(op) = cache.lock().expect("kernel cache poisoned").get(&key) {
            return Ok(op.clone());
        }
        let op = Self::calibrated(grid)?;
        cache.lock().expect("kernel cache poisoned").insert(key, op.clone());
        Ok(op)
    }

    fn unnormalized(grid: Grid2D) -> Result<Self> {
        let n = grid.n();
        let length = grid.length();
        let dx = grid.dx();
        let area = grid.cell_area();
        let kernel: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                if idx == 0 {
                    return 0.0;
                }
                let (i, j) = (idx / n, idx % n);
                let h1 = grid.mode(j) as f64 * dx;
                let h2 = grid.mode(i) as f64 * dx;
                let mut s = 0.0;
                for a in -IMAGE_RINGS..=IMAGE_RINGS {
                    for b in -IMAGE_RINGS..=IMAGE_RINGS {
                        let r = (h1 + a as f64 * length).hypot(h2 + b as f64 * length);
                        s += r.powf(-2.5);
                    }
                }
                s
            })
            .collect();
        let lattice_sum = kernel.iter().sum::<f64>() * area;

        // ∫ |h|^{-5/2} outside the square of half-width (rings + 1/2)·L; out there
        // u(x - h) averages to the mean, so only u(x) - mean survives.
        // Periodic images of h = 0 contribute u(x) - u(x) = 0.
        let half_width = (IMAGE_RINGS as f64 + 0.5) * length;
        let far = outside_square_integral()? * half_width.powf(-0.5);

        // singular cell: ∫_cell (u(x) - u(x-h)) |h|^{-5/2} dh ≈ -(Δu/4) ∫_cell |h|^{-1/2} dh
        let cell_weight = 0.25 * cell_integral()? * dx.powf(1.5);

        let kernel_hat = {
            let mut spec = Fft2::cached(n).forward_real(&kernel);
            let scale = (n * n) as f64;
            spec.iter_mut().for_each(|c| *c *= scale);
            spec
        };
        Ok(Self {
            grid,
            kernel_hat,
            diagonal: lattice_sum + far,
            cell_weight,
            constant: 1.0,
        })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    fn apply_raw(&self, u: &Field) -> Result<Field> {
        self.grid.check_same(u.grid())?;
        let area = self.grid.cell_area();
        let g = self.grid;
        // symbol of u(x)·D - dA·Σ K(h) u(x-h) + w·(-Δu)
        Ok(u.map_spectral(|idx| {
            if idx == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let k2 = g.wavenumber(idx).powi(2);
            let conv = self.kernel_hat[idx] * area;
            Complex64::new(self.diagonal + self.cell_weight * k2, 0.0) - conv
        }))
    }

    pub fn apply(&self, u: &Field) -> Result<IntegralOutput> {
        let raw = self.apply_raw(u)?;
        Ok(IntegralOutput {
            field: raw.scale(self.constant),
            above_cutoff: u.energy_above_cutoff() > ABOVE_CUTOFF_TOL,
            constant: self.constant,
        })
    }
}

/// `|D|^{order} u` through the singular-integral representation. Only
/// `order = 1/2` has an implemented kernel.
pub fn fractional_laplacian_integral(u: &Field, order: f64) -> Result<IntegralOutput> {
    if order != 0.5 {
        return Err(Error::out_of_range("order", order, "1/2"));
    }
    IntegralLaplacian::cached(*u.grid())?.apply(u)
}

/// Mean-free Gaussian bump of width eight cells at the box center.
pub fn calibration_bump(grid: Grid2D) -> Result<Field> {
    let c = grid.length() / 2.0;
    let sigma = 8.0 * grid.dx();
    Ok(Field::from_fn(grid, |x, y| {
        (-((x - c).powi(2) + (y - c).powi(2)) / (2.0 * sigma * sigma)).exp()
    })?
    .without_mean()
    .dealiased())
}

/// `∫_{[-1/2,1/2]²} |h|^{-1/2} dh`.
fn cell_integral() -> Result<f64> {
    // polar form: 8 ∫_0^{π/4} (2/3) (1/(2 cos θ))^{3/2} dθ
    let r = Quadrature::default().integrate(
        |t: f64| (2.0 / 3.0) * (0.5 / t.cos()).powf(1.5),
        0.0,
        std::f64::consts::FRAC_PI_4,
    );
    finish(r, "cell integral").map(|v| 8.0 * v)
}

/// `∫_{outside [-1,1]²} |h|^{-5/2} dh = 16 ∫_0^{π/4} cos^{1/2} θ dθ`.
fn outside_square_integral() -> Result<f64> {
    let r = Quadrature::default().integrate(|t: f64| t.cos().sqrt(), 0.0, std::f64::consts::FRAC_PI_4);
    finish(r, "far-field integral").map(|v| 16.0 * v)
}

fn finish(r: QuadratureResult, what: &str) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::Quadrature {
            what: what.into(),
            achieved: r.error,
        })
    }
}
