use std::fmt;

use num_complex::Complex64;

use super::field::Field;
use super::grid::Grid2D;
use crate::error::{Error, Result};

/// Fourier multiplier with a closed-form symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplier {
    /// `i k1 / |k|`
    Riesz1,
    /// `i k2 / |k|`
    Riesz2,
    /// `|k|^σ` for any real σ; negative σ needs a mean-free input.
    FracLap(f64),
    /// `exp(-t κ |k|^α)`
    Semigroup { t: f64, alpha: f64, kappa: f64 },
    /// `i k1`
    D1,
    /// `i k2`
    D2,
}

impl Multiplier {
    pub fn semigroup(t: f64, alpha: f64) -> Self {
        Multiplier::Semigroup { t, alpha, kappa: 1.0 }
    }

    /// True when the symbol is singular at `k = 0`.
    pub fn requires_mean_free(&self) -> bool {
        match self {
            Multiplier::Riesz1 | Multiplier::Riesz2 => true,
            Multiplier::FracLap(s) => *s < 0.0,
            _ => false,
        }
    }

    /// Symbol at the wavevector `(k1, k2)`. The zero mode of singular
    /// symbols is mapped to 0.
    pub fn symbol(&self, k1: f64, k2: f64) -> Complex64 {
        let k = k1.hypot(k2);
        match *self {
            Multiplier::Riesz1 if k > 0.0 => Complex64::new(0.0, k1 / k),
            Multiplier::Riesz2 if k > 0.0 => Complex64::new(0.0, k2 / k),
            Multiplier::Riesz1 | Multiplier::Riesz2 => Complex64::new(0.0, 0.0),
            Multiplier::FracLap(s) => {
                if s == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else if k == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(k.powf(s), 0.0)
                }
            }
            Multiplier::Semigroup { t, alpha, kappa } => Complex64::new((-t * kappa * k.powf(alpha)).exp(), 0.0),
            Multiplier::D1 => Complex64::new(0.0, k1),
            Multiplier::D2 => Complex64::new(0.0, k2),
        }
    }

    /// Odd symbols cannot be represented on the unpaired Nyquist modes.
    fn is_odd(&self) -> bool {
        matches!(
            self,
            Multiplier::Riesz1 | Multiplier::Riesz2 | Multiplier::D1 | Multiplier::D2
        )
    }

    pub(crate) fn gain(&self, grid: &Grid2D, idx: usize) -> Complex64 {
        if self.is_odd() && grid.is_nyquist(idx) {
            return Complex64::new(0.0, 0.0);
        }
        let (k1, k2) = grid.wavevector(idx);
        self.symbol(k1, k2)
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplier::Riesz1 => write!(f, "riesz1"),
            Multiplier::Riesz2 => write!(f, "riesz2"),
            Multiplier::FracLap(s) => write!(f, "fracLap({s})"),
            Multiplier::Semigroup { t, alpha, kappa } => {
                write!(f, "semigroup(t={t}, alpha={alpha}, kappa={kappa})")
            }
            Multiplier::D1 => write!(f, "d1"),
            Multiplier::D2 => write!(f, "d2"),
        }
    }
}

/// Multiplies every Fourier coefficient of `u` by the symbol of `m`.
pub fn apply_multiplier(u: &Field, m: Multiplier) -> Result<Field> {
    if m.requires_mean_free() && !u.is_mean_free() {
        return Err(Error::ZeroMode {
            op: m.name(),
            zero_mode: u.zero_mode(),
        });
    }
    let grid = *u.grid();
    Ok(u.map_spectral(|idx| m.gain(&grid, idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(32, 2.0 * PI).unwrap()
    }

    #[test]
    fn riesz_on_sine_gives_shifted_cosine() {
        // R1 sin(k·x) = (k1/|k|) cos(k·x) from the symbol i k1/|k|
        let (a, b) = (3.0, 4.0);
        let u = Field::from_fn(grid(), |x, y| (a * x + b * y).sin()).unwrap();
        let r = apply_multiplier(&u, Multiplier::Riesz1).unwrap();
        let expect = Field::from_fn(grid(), |x, y| 0.6 * (a * x + b * y).cos()).unwrap();
        assert!(r.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn frac_lap_zero_is_identity() {
        let u = Field::from_fn(grid(), |x, y| (x + 2.0 * y).cos() + 0.2 * (5.0 * y).sin()).unwrap();
        let r = apply_multiplier(&u, Multiplier::FracLap(0.0)).unwrap();
        assert!(r.max_abs_diff(&u) < 1e-14);
    }

    #[test]
    fn half_derivative_eigenvalue() {
        let u = Field::from_fn(grid(), |x, _| (2.0 * x).cos()).unwrap();
        let r = apply_multiplier(&u, Multiplier::FracLap(1.0)).unwrap();
        let expect = u.scale(2.0);
        assert!(r.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn riesz_rejects_nonzero_mean() {
        let u = Field::from_fn(grid(), |x, _| 1.0 + x.cos()).unwrap();
        assert!(matches!(
            apply_multiplier(&u, Multiplier::Riesz2),
            Err(Error::ZeroMode { .. })
        ));
        assert!(apply_multiplier(&u, Multiplier::FracLap(0.5)).is_ok());
    }

    #[test]
    fn symbols_have_documented_ranges() {
        for &(k1, k2) in &[(1.0, 0.0), (0.3, -2.0), (-5.0, 7.0)] {
            let r1 = Multiplier::Riesz1.symbol(k1, k2);
            let r2 = Multiplier::Riesz2.symbol(k1, k2);
            assert!(((r1.norm_sqr() + r2.norm_sqr()) - 1.0).abs() < 1e-15);
            let s = Multiplier::semigroup(0.7, 1.0).symbol(k1, k2);
            assert!(s.re > 0.0 && s.re <= 1.0 && s.im == 0.0);
            assert!(Multiplier::FracLap(1.5).symbol(k1, k2).re >= 0.0);
        }
    }
}
