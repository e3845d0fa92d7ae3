use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square periodic box with `n x n` samples and period `length` on both axes.
///
/// Samples are stored row-major: index `i * n + j` holds the value at
/// `x1 = j * dx`, `x2 = i * dx`. Spectral arrays use the same layout with
/// row `i` carrying the mode number of `x2` and column `j` that of `x1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n: usize,
    length: f64,
}

impl Grid2D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("period {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    /// `n = 128` samples on a box of period `2π·8`.
    pub fn desk() -> Self {
        Self {
            n: 128,
            length: 2.0 * PI * 8.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    /// Smallest non-zero wavenumber magnitude, `2π / L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed mode number of array index `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Array index of signed mode number `m` (taken modulo `n`).
    #[inline]
    pub fn index_of_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// Physical wavevector `(k1, k2)` of the spectral entry at `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        let (i, j) = (idx / self.n, idx % self.n);
        let k0 = self.k0();
        (k0 * self.mode(j) as f64, k0 * self.mode(i) as f64)
    }

    #[inline]
    pub fn wavenumber(&self, idx: usize) -> f64 {
        let (k1, k2) = self.wavevector(idx);
        k1.hypot(k2)
    }

    /// True for the unpaired row or column `m = -n/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = self.n / 2;
        idx / self.n == half || idx % self.n == half
    }

    /// Largest retained mode number under the 2/3 rule: `|m| <= floor(n/3)`.
    pub fn dealias_mode(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Largest retained wavenumber along one axis.
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_mode() as f64 * self.k0()
    }

    #[inline]
    pub fn is_retained(&self, idx: usize) -> bool {
        let kmax = self.dealias_mode();
        let (i, j) = (idx / self.n, idx % self.n);
        self.mode(i).abs() <= kmax && self.mode(j).abs() <= kmax
    }

    /// Physical coordinates of sample `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let dx = self.dx();
        ((idx % self.n) as f64 * dx, (idx / self.n) as f64 * dx)
    }

    /// Same box with `factor` times as many samples per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.n * factor, self.length)
    }

    pub fn check_same(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }

    /// Minimum-image distance between two points of the torus.
    pub fn periodic_distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let wrap = |d: f64| {
            let d = d.rem_euclid(self.length);
            d.min(self.length - d)
        };
        wrap(a.0 - b.0).hypot(wrap(a.1 - b.1))
    }
}

impl fmt::Display for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} (L = {})", self.n, self.n, self.length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_odd_sizes() {
        assert!(Grid2D::new(4, 1.0).is_err());
        assert!(Grid2D::new(48, 1.0).is_err());
        assert!(Grid2D::new(16, 0.0).is_err());
        assert!(Grid2D::new(16, 1.0).is_ok());
    }

    #[test]
    fn modes_and_indices_agree() {
        let g = Grid2D::new(16, 2.0 * PI).unwrap();
        for i in 0..16 {
            assert_eq!(g.index_of_mode(g.mode(i)), i);
        }
        assert_eq!(g.mode(8), -8);
        assert_eq!(g.dealias_mode(), 5);
    }

    #[test]
    fn nonzero_modes_have_positive_wavenumber() {
        let g = Grid2D::new(8, 3.0).unwrap();
        for idx in 1..g.len() {
            assert!(g.wavenumber(idx) > 0.0);
        }
        assert_eq!(g.wavenumber(0), 0.0);
    }

    #[test]
    fn periodic_distance_wraps() {
        let g = Grid2D::new(8, 10.0).unwrap();
        let d = g.periodic_distance((0.5, 0.0), (9.5, 0.0));
        assert!((d - 1.0).abs() < 1e-12);
    }
}
