use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functionals::{dissipation_I, omega_Omega};
use super::omega::ModulusOfContinuity;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoCReport {
    pub delta: f64,
    pub gamma: f64,
    /// Constant multiplying `Ω`.
    pub c: f64,
    pub xi_grid: Vec<f64>,
    pub omega_vals: Vec<f64>,
    pub omega_deriv: Vec<f64>,
    /// `Ω` with unit constant; the criterion uses `c·Ω`.
    pub omega_big_vals: Vec<f64>,
    pub i_vals: Vec<f64>,
    /// `c·Ω·ω' + I`
    pub criterion: Vec<f64>,
    /// Largest criterion value over both grids; negative when certified.
    pub margin: f64,
    /// Largest `c` for which every point on both grids stays negative.
    pub max_certifiable_c: f64,
    /// Points of the doubled grid that were not already on the base grid.
    pub refinement_points: usize,
    pub refinement_margin: f64,
    /// Every `ξ`, base or refinement, with a non-negative criterion.
    pub offending: Vec<f64>,
    pub certified: bool,
}

impl MoCReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("xi,omega,omega_deriv,Omega,I,criterion\n");
        for i in 0..self.xi_grid.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                self.xi_grid[i],
                self.omega_vals[i],
                self.omega_deriv[i],
                self.omega_big_vals[i],
                self.i_vals[i],
                self.criterion[i]
            ));
        }
        out
    }
}

struct Point {
    omega: f64,
    deriv: f64,
    big: f64,
    i: f64,
}

fn evaluate(moc: &ModulusOfContinuity, xi: f64) -> Result<Point> {
    let (omega, deriv) = moc.omega_eval(xi)?;
    Ok(Point {
        omega,
        deriv,
        big: omega_Omega(moc, xi)?,
        i: dissipation_I(moc, xi)?,
    })
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Scans `c·Ω(ξ)ω'(ξ) + I(ξ)` on `points` log-spaced values in `xi_range`,
/// then on the midpoints of the doubled grid. Certified only if both scans
/// are strictly negative.
pub fn certify_negativity(moc: &ModulusOfContinuity, c: f64, xi_range: (f64, f64), points: usize) -> Result<MoCReport> {
    let (lo, hi) = xi_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::out_of_range(
            "xi_range upper end",
            hi,
            format!("finite and above {lo} > 0"),
        ));
    }
    if points < 2 {
        return Err(Error::out_of_range("points", points as f64, "at least 2"));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::out_of_range("c", c, "[0, ∞)"));
    }
    let xs = log_grid(lo, hi, points);
    let base: Vec<Point> = xs.par_iter().map(|&x| evaluate(moc, x)).collect::<Result<_>>()?;
    let mids: Vec<f64> = xs.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    let refined: Vec<Point> = mids.par_iter().map(|&x| evaluate(moc, x)).collect::<Result<_>>()?;

    let crit = |p: &Point| c * p.big * p.deriv + p.i;
    // c·Ωω' + I < 0 ⇔ c < −I/(Ωω'); points with I ≥ 0 allow no c at all
    let c_cap = |p: &Point| {
        let adv = p.big * p.deriv;
        if p.i >= 0.0 {
            0.0
        } else if adv > 0.0 {
            -p.i / adv
        } else {
            f64::INFINITY
        }
    };
    let criterion: Vec<f64> = base.iter().map(crit).collect();
    let refined_crit: Vec<f64> = refined.iter().map(crit).collect();
    let margin = criterion.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let refinement_margin = refined_crit.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_certifiable_c = base.iter().chain(&refined).map(c_cap).fold(f64::INFINITY, f64::min);
    let mut offending: Vec<f64> = xs
        .iter()
        .zip(&criterion)
        .chain(mids.iter().zip(&refined_crit))
        .filter(|(_, v)| !(**v < 0.0))
        .map(|(x, _)| *x)
        .collect();
    offending.sort_by(f64::total_cmp);

    Ok(MoCReport {
        delta: moc.delta,
        gamma: moc.gamma,
        c,
        omega_vals: base.iter().map(|p| p.omega).collect(),
        omega_deriv: base.iter().map(|p| p.deriv).collect(),
        omega_big_vals: base.iter().map(|p| p.big).collect(),
        i_vals: base.iter().map(|p| p.i).collect(),
        certified: offending.is_empty(),
        xi_grid: xs,
        criterion,
        margin: margin.max(refinement_margin),
        max_certifiable_c,
        refinement_points: mids.len(),
        refinement_margin,
        offending,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_is_recomputable() {
        let w = ModulusOfContinuity::default();
        let r = certify_negativity(&w, 1.0, (1e-6, 1e6), 40).unwrap();
        for i in 0..r.xi_grid.len() {
            let v = r.c * r.omega_big_vals[i] * r.omega_deriv[i] + r.i_vals[i];
            assert_eq!(v, r.criterion[i]);
        }
        assert_eq!(r.refinement_points, 39);
        assert_eq!(r.certified, r.offending.is_empty());
        assert!(r.csv().lines().count() == 41);
    }

    #[test]
    fn large_constant_fails_with_offenders() {
        let w = ModulusOfContinuity::default();
        let r = certify_negativity(&w, 1.0, (1e-4, 1e2), 30).unwrap();
        let big = 2.0 * r.max_certifiable_c;
        let r2 = certify_negativity(&w, big, (1e-4, 1e2), 30).unwrap();
        assert!(!r2.certified);
        assert!(!r2.offending.is_empty());
    }

    #[test]
    fn rejects_bad_range() {
        let w = ModulusOfContinuity::default();
        assert!(certify_negativity(&w, 1.0, (0.0, 1.0), 10).is_err());
        assert!(certify_negativity(&w, 1.0, (1.0, 0.5), 10).is_err());
        assert!(certify_negativity(&w, 1.0, (1e-3, 1.0), 1).is_err());
    }
}
