use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::partition::{chi, phi, ring_bounds};
use crate::error::{Error, Result};
use crate::report::VerificationReport;
use crate::spectral::{apply_multiplier, Field, Grid2D, Multiplier};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Support {
    /// `|ξ| ≤ λ`
    Ball { lambda: f64 },
    /// `λ·[3/4, 2]`
    Ring { lambda: f64 },
}

impl Support {
    pub fn lambda(&self) -> f64 {
        match *self {
            Support::Ball { lambda } | Support::Ring { lambda } => lambda,
        }
    }

    fn contains(&self, xi: f64) -> bool {
        let tol = 1e-12;
        match *self {
            Support::Ball { lambda } => xi <= lambda * (1.0 + tol),
            Support::Ring { lambda } => {
                let (lo, hi) = ring_bounds(0);
                xi >= lambda * lo * (1.0 - tol) && xi <= lambda * hi * (1.0 + tol)
            }
        }
    }
}

/// Rejects `u` if any coefficient outside `support` carries more than
/// `1e-24` of the spectral energy.
pub fn check_support(u: &Field, support: Support) -> Result<()> {
    let g = u.grid();
    let total: f64 = u.spectral().iter().map(|c| c.norm_sqr()).sum();
    let outside: f64 = u
        .spectral()
        .iter()
        .enumerate()
        .filter(|(idx, _)| !support.contains(g.wavenumber(*idx)))
        .map(|(_, c)| c.norm_sqr())
        .sum();
    if outside > 1e-24 * total {
        Err(Error::SupportViolation(format!(
            "{:.3e} of the energy lies outside {support:?}",
            outside / total
        )))
    } else {
        Ok(())
    }
}

/// Every lattice mode of the ring with weight `φ(|k|/λ)` and zero phase at
/// the origin, so the samples peak there.
pub fn ring_supported(grid: Grid2D, lambda: f64) -> Result<Field> {
    radial_field(grid, |xi| phi(xi / lambda))
}

/// Every non-zero lattice mode of the ball with weight `χ(|k|/λ)`.
pub fn ball_supported(grid: Grid2D, lambda: f64) -> Result<Field> {
    radial_field(grid, |xi| if xi == 0.0 { 0.0 } else { chi(xi / lambda) })
}

fn radial_field(grid: Grid2D, weight: impl Fn(f64) -> f64) -> Result<Field> {
    let spec = (0..grid.len())
        .map(|idx| Complex64::new(weight(grid.wavenumber(idx)), 0.0))
        .collect();
    let u = Field::from_spectral(grid, spec)?;
    let peak = u.sup_norm();
    Ok(if peak > 0.0 { u.scale(1.0 / peak) } else { u })
}

/// `max_{|α| = k} ‖∂^α u‖_{L^p}`.
pub fn derivative_norm(u: &Field, k: u32, p: f64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for a in 0..=k {
        let mut d = u.clone();
        for _ in 0..a {
            d = apply_multiplier(&d, Multiplier::D1)?;
        }
        for _ in a..k {
            d = apply_multiplier(&d, Multiplier::D2)?;
        }
        best = best.max(d.lp_norm(p));
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinConstant {
    pub lambda: f64,
    /// Ball: `‖∇^k u‖_q / (λ^{k+2(1/p-1/q)} ‖u‖_p)`. Ring: `‖∇^k u‖_p / (λ^k ‖u‖_p)`.
    pub constant: f64,
}

pub fn bernstein_constant(u: &Field, support: Support, k: u32, p: f64, q: f64) -> Result<BernsteinConstant> {
    check_support(u, support)?;
    let lambda = support.lambda();
    let constant = match support {
        Support::Ball { .. } => {
            if p > q {
                return Err(Error::out_of_range("p", p, format!("at most q = {q}")));
            }
            let gain = k as f64 + 2.0 * (1.0 / p - 1.0 / q);
            derivative_norm(u, k, q)? / (lambda.powf(gain) * u.lp_norm(p))
        }
        Support::Ring { .. } => derivative_norm(u, k, p)? / (lambda.powi(k as i32) * u.lp_norm(p)),
    };
    Ok(BernsteinConstant { lambda, constant })
}

/// Measures the constant at every `(λ, u)` sample. Passes when the spread is
/// at most a factor 4 and, for rings, the two-sided bound holds with that
/// same factor: `1/4 ≤ constant ≤ 4`.
pub fn bernstein_probe(samples: &[(Support, Field)], k: u32, p: f64, q: f64) -> Result<VerificationReport> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Format("bernstein probe needs at least one sample".into()))?;
    let constants = samples
        .iter()
        .map(|(s, u)| bernstein_constant(u, *s, k, p, q))
        .collect::<Result<Vec<_>>>()?;
    let hi = constants.iter().map(|c| c.constant).fold(0.0, f64::max);
    let lo = constants.iter().map(|c| c.constant).fold(f64::INFINITY, f64::min);
    let ring = samples.iter().all(|(s, _)| matches!(s, Support::Ring { .. }));
    let uniform = hi <= 4.0 * lo;
    let two_sided = !ring || (lo >= 0.25 && hi <= 4.0);
    Ok(VerificationReport::new(
        if ring { "bernstein-ring" } else { "bernstein-ball" },
        "bernstein",
        first.1.grid(),
        hi,
        lo,
        uniform && two_sided,
    )
    .with_constant("max_constant", hi)
    .with_constant("min_constant", lo)
    .with_detail("k", k)
    .with_detail("p", p)
    .with_detail("q", q)
    .with_detail("constants", &constants))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn plane_wave_gradient_is_exact() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let u = Field::from_fn(g, |x, _| (8.0 * x).sin()).unwrap();
        let c = bernstein_constant(&u, Support::Ring { lambda: 8.0 }, 1, f64::INFINITY, f64::INFINITY).unwrap();
        assert!((c.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_violation_is_rejected() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let u = Field::from_fn(g, |x, _| (3.0 * x).sin()).unwrap();
        assert!(matches!(
            bernstein_constant(&u, Support::Ring { lambda: 8.0 }, 1, 2.0, 2.0),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn synthetic_data_respects_support() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        check_support(&ring_supported(g, 8.0).unwrap(), Support::Ring { lambda: 8.0 }).unwrap();
        check_support(&ball_supported(g, 8.0).unwrap(), Support::Ball { lambda: 8.0 }).unwrap();
    }
}
