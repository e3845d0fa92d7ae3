use num_complex::Complex64;

use super::fft::Fft2;
use super::grid::Grid2D;
use crate::error::{Error, Result};

/// Real scalar field on a periodic grid, held both as samples and as Fourier
/// coefficients. Immutable once built; every constructor keeps the two
/// representations consistent.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid2D,
    physical: Vec<f64>,
    spectral: Vec<Complex64>,
    mean_free: bool,
}

impl Field {
    /// Builds from samples. The field is flagged mean-free when its zero mode
    /// is negligible, in which case the zero mode is set to exactly 0.
    pub fn from_physical(grid: Grid2D, physical: Vec<f64>) -> Result<Self> {
        if physical.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a {} grid",
                physical.len(),
                grid
            )));
        }
        let mut spectral = Fft2::cached(grid.n()).forward_real(&physical);
        // samples are kept verbatim so snapshots roundtrip bit for bit
        let mean_free = negligible_mean(&spectral);
        if mean_free {
            spectral[0] = Complex64::new(0.0, 0.0);
        }
        Ok(Self {
            grid,
            physical,
            spectral,
            mean_free,
        })
    }

    /// Builds from Fourier coefficients; the Hermitian part is kept so the
    /// samples are exactly real.
    pub fn from_spectral(grid: Grid2D, mut spectral: Vec<Complex64>) -> Result<Self> {
        if spectral.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} coefficients for a {} grid",
                spectral.len(),
                grid
            )));
        }
        hermitian_part(&grid, &mut spectral);
        Ok(Self::settle(grid, spectral))
    }

    fn settle(grid: Grid2D, mut spectral: Vec<Complex64>) -> Self {
        let mean_free = negligible_mean(&spectral);
        if mean_free {
            spectral[0] = Complex64::new(0.0, 0.0);
        }
        let physical = Fft2::cached(grid.n()).inverse_real(&spectral);
        Self {
            grid,
            physical,
            spectral,
            mean_free,
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let samples = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.point(idx);
                f(x1, x2)
            })
            .collect();
        Self::from_physical(grid, samples)
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            physical: vec![0.0; grid.len()],
            spectral: vec![Complex64::new(0.0, 0.0); grid.len()],
            mean_free: true,
        }
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        let mut spectral = vec![Complex64::new(0.0, 0.0); grid.len()];
        spectral[0] = Complex64::new(value, 0.0);
        Self {
            grid,
            physical: vec![value; grid.len()],
            spectral,
            mean_free: value == 0.0,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn physical(&self) -> &[f64] {
        &self.physical
    }

    pub fn spectral(&self) -> &[Complex64] {
        &self.spectral
    }

    pub fn is_mean_free(&self) -> bool {
        self.mean_free
    }

    pub fn zero_mode(&self) -> f64 {
        self.spectral[0].re
    }

    pub fn into_parts(self) -> (Grid2D, Vec<f64>, Vec<Complex64>) {
        (self.grid, self.physical, self.spectral)
    }

    /// Copy with the zero mode removed.
    pub fn without_mean(&self) -> Field {
        let mut spec = self.spectral.clone();
        spec[0] = Complex64::new(0.0, 0.0);
        Self::settle(self.grid, spec)
    }

    /// Applies `gain(idx)` mode by mode.
    pub fn map_spectral(&self, gain: impl Fn(usize) -> Complex64) -> Field {
        let spec = self.spectral.iter().enumerate().map(|(idx, c)| c * gain(idx)).collect();
        let mut spec: Vec<Complex64> = spec;
        hermitian_part(&self.grid, &mut spec);
        Self::settle(self.grid, spec)
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealiased(&self) -> Field {
        let g = self.grid;
        self.map_spectral(|idx| {
            if g.is_retained(idx) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Fraction of spectral energy outside the 2/3-rule band.
    pub fn energy_above_cutoff(&self) -> f64 {
        let mut total = 0.0;
        let mut above = 0.0;
        for (idx, c) in self.spectral.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if !self.grid.is_retained(idx) {
                above += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            above / total
        }
    }

    pub fn is_band_limited(&self) -> bool {
        self.spectral
            .iter()
            .enumerate()
            .all(|(idx, c)| self.grid.is_retained(idx) || c.norm() == 0.0)
    }

    pub fn scale(&self, a: f64) -> Field {
        self.lincomb(a, self, 0.0)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.axpby(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpby(1.0, other, -1.0)
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(self.lincomb(a, other, b))
    }

    fn lincomb(&self, a: f64, other: &Field, b: f64) -> Field {
        let spectral: Vec<Complex64> = self
            .spectral
            .iter()
            .zip(&other.spectral)
            .map(|(x, y)| x * a + y * b)
            .collect();
        let physical = self
            .physical
            .iter()
            .zip(&other.physical)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let mean_free = spectral[0].norm() == 0.0;
        Field {
            grid: self.grid,
            physical,
            spectral,
            mean_free,
        }
    }

    /// Spectral translation `u(· - h)`.
    pub fn translate(&self, h: (f64, f64)) -> Field {
        let g = self.grid;
        self.map_spectral(|idx| {
            let (k1, k2) = g.wavevector(idx);
            let phase = -(k1 * h.0 + k2 * h.1);
            if g.is_nyquist(idx) {
                // unpaired modes only carry the cosine part on the lattice
                return Complex64::new(phase.cos(), 0.0);
            }
            Complex64::from_polar(1.0, phase)
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.physical.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `L^p` norm with the Riemann sum over the sample lattice; `p = ∞`
    /// takes the largest sample.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_of(&self.physical, p, self.grid.cell_area())
    }

    /// Gradient components computed spectrally.
    pub fn gradient(&self) -> (Field, Field) {
        let g = self.grid;
        let d = |axis: usize| {
            self.map_spectral(move |idx| {
                if g.is_nyquist(idx) {
                    return Complex64::new(0.0, 0.0);
                }
                let (k1, k2) = g.wavevector(idx);
                Complex64::new(0.0, if axis == 0 { k1 } else { k2 })
            })
        };
        (d(0), d(1))
    }

    /// `max_x |∇u(x)|`.
    pub fn grad_sup(&self) -> f64 {
        let (a, b) = self.gradient();
        a.physical
            .iter()
            .zip(&b.physical)
            .fold(0.0, |m, (x, y)| m.max(x.hypot(*y)))
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.physical
            .iter()
            .zip(&other.physical)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.physical.iter().all(|x| x.is_finite())
    }

    /// Zero-padded interpolation onto a grid `factor` times finer.
    pub fn upsample(&self, factor: usize) -> Result<Field> {
        let fine = self.grid.refined(factor)?;
        let mut spec = vec![Complex64::new(0.0, 0.0); fine.len()];
        let n = self.grid.n();
        for (idx, c) in self.spectral.iter().enumerate() {
            if self.grid.is_nyquist(idx) {
                continue;
            }
            let (i, j) = (idx / n, idx % n);
            let fi = fine.index_of_mode(self.grid.mode(i));
            let fj = fine.index_of_mode(self.grid.mode(j));
            spec[fi * fine.n() + fj] = *c;
        }
        Field::from_spectral(fine, spec)
    }

    /// Truncation onto a grid `factor` times coarser (modes outside the
    /// coarse lattice are dropped).
    pub fn downsample(&self, factor: usize) -> Result<Field> {
        if factor == 0 || !self.grid.n().is_multiple_of(factor) {
            return Err(Error::InvalidGrid(format!("cannot coarsen by {factor}")));
        }
        let coarse = Grid2D::new(self.grid.n() / factor, self.grid.length())?;
        let mut spec = vec![Complex64::new(0.0, 0.0); coarse.len()];
        let half = (coarse.n() / 2) as i64;
        for (idx, c) in self.spectral.iter().enumerate() {
            let (i, j) = (idx / self.grid.n(), idx % self.grid.n());
            let (mi, mj) = (self.grid.mode(i), self.grid.mode(j));
            if mi.abs() >= half || mj.abs() >= half {
                continue;
            }
            spec[coarse.index_of_mode(mi) * coarse.n() + coarse.index_of_mode(mj)] = *c;
        }
        Field::from_spectral(coarse, spec)
    }
}

/// Keeps `(ŝ(k) + conj ŝ(-k)) / 2`, the spectrum of the real part.
fn negligible_mean(spectral: &[Complex64]) -> bool {
    let scale = spectral.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    spectral[0].norm_sqr() <= 1e-28 * scale.max(f64::MIN_POSITIVE)
}

pub(crate) fn hermitian_part(grid: &Grid2D, spec: &mut [Complex64]) {
    let n = grid.n();
    for i in 0..n {
        let ni = (n - i) % n;
        for j in 0..n {
            let nj = (n - j) % n;
            let a = i * n + j;
            let b = ni * n + nj;
            if a < b {
                let avg = (spec[a] + spec[b].conj()) * 0.5;
                spec[a] = avg;
                spec[b] = avg.conj();
            } else if a == b {
                spec[a] = Complex64::new(spec[a].re, 0.0);
            }
        }
    }
}

pub(crate) fn lp_norm_of(samples: &[f64], p: f64, cell_area: f64) -> f64 {
    if p.is_infinite() {
        samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else if p == 2.0 {
        (samples.iter().map(|x| x * x).sum::<f64>() * cell_area).sqrt()
    } else if p == 1.0 {
        samples.iter().map(|x| x.abs()).sum::<f64>() * cell_area
    } else {
        let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let s: f64 = samples.iter().map(|x| (x.abs() / peak).powf(p)).sum();
        peak * (s * cell_area).powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(16, 2.0 * PI).unwrap()
    }

    #[test]
    fn representations_agree() {
        let f = Field::from_fn(grid(), |x, y| (2.0 * x).sin() * y.cos() + 0.3 * (x - y).cos()).unwrap();
        let again = Field::from_spectral(grid(), f.spectral().to_vec()).unwrap();
        assert!(f.max_abs_diff(&again) < 1e-13);
        assert!(f.is_mean_free());
    }

    #[test]
    fn constant_field_is_not_mean_free() {
        let f = Field::from_fn(grid(), |_, _| 2.0).unwrap();
        assert!(!f.is_mean_free());
        assert!((f.zero_mode() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lp_norms_of_plane_wave() {
        let f = Field::from_fn(grid(), |x, _| x.sin()).unwrap();
        assert!((f.sup_norm() - 1.0).abs() < 1e-12);
        // ∫ sin² over the box = L² / 2
        let expect = (2.0 * PI * 2.0 * PI / 2.0f64).sqrt();
        assert!((f.lp_norm(2.0) - expect).abs() < 1e-12);
        let l4 = f.lp_norm(4.0);
        let expect4 = (2.0 * PI * 2.0 * PI * 3.0 / 8.0f64).powf(0.25);
        assert!((l4 - expect4).abs() < 1e-12);
    }

    #[test]
    fn translation_shifts_samples() {
        let g = grid();
        let f = Field::from_fn(g, |x, y| x.sin() + (2.0 * y).cos()).unwrap();
        let h = (g.dx() * 3.0, g.dx());
        let shifted = f.translate(h);
        let expect = Field::from_fn(g, |x, y| (x - h.0).sin() + (2.0 * (y - h.1)).cos()).unwrap();
        assert!(shifted.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn upsample_then_downsample_is_identity() {
        let f = Field::from_fn(grid(), |x, y| (3.0 * x + y).sin()).unwrap();
        let back = f.upsample(2).unwrap().downsample(2).unwrap();
        assert!(f.max_abs_diff(&back) < 1e-13);
    }
}
