use serde::{Deserialize, Serialize};

use super::omega::ModulusOfContinuity;
use crate::error::{Error, Result};

/// Upper end of the `C₀` search grid; `ω` is only trusted up to here.
pub const C0_GRID_MAX: f64 = 1e6;
const C0_GRID_MIN: f64 = 1e-6;
const C0_GRID_POINTS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaChoice {
    pub lambda: f64,
    pub ln_lambda: f64,
    /// Smallest grid value with `ω(C₀) > 2‖θ⁰‖_∞`.
    pub c0: f64,
    pub theta0_linf: f64,
    pub grad: f64,
}

/// `λ = g·ω^{-1}(3m)/(2m)` with `m = ‖θ⁰‖_∞` and `g = ‖∇θ(T₁)‖_∞`, evaluated
/// through `ln ω^{-1}` so the double-exponential branch cannot overflow
/// silently.
pub fn choose_lambda(moc: &ModulusOfContinuity, theta0_linf: f64, grad: f64) -> Result<LambdaChoice> {
    if !(theta0_linf > 0.0 && theta0_linf.is_finite()) {
        return Err(Error::out_of_range("theta0_linf", theta0_linf, "(0, ∞)"));
    }
    if !(grad > 0.0 && grad.is_finite()) {
        return Err(Error::out_of_range("grad_at_T1", grad, "(0, ∞)"));
    }
    let base = ModulusOfContinuity { scale: 1.0, ..*moc };
    let m = theta0_linf;
    let ln_lambda = grad.ln() + base.ln_inverse(3.0 * m)? - (2.0 * m).ln();
    let lambda = ln_lambda.exp();
    if !lambda.is_finite() {
        return Err(Error::OmegaRange {
            target: 3.0 * m,
            reason: format!("λ = e^{ln_lambda:.3e} is not representable"),
        });
    }
    Ok(LambdaChoice {
        lambda,
        ln_lambda,
        c0: choose_c0(&base, m)?,
        theta0_linf: m,
        grad,
    })
}

fn choose_c0(moc: &ModulusOfContinuity, m: f64) -> Result<f64> {
    let (a, b) = (C0_GRID_MIN.ln(), C0_GRID_MAX.ln());
    (0..C0_GRID_POINTS)
        .map(|i| (a + (b - a) * i as f64 / (C0_GRID_POINTS - 1) as f64).exp())
        .find(|&x| moc.eval(x) > 2.0 * m)
        .ok_or_else(|| Error::OmegaRange {
            target: 2.0 * m,
            reason: format!("ω({C0_GRID_MAX:e}) = {} does not exceed it", moc.eval(C0_GRID_MAX)),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_data_limit() {
        let w = ModulusOfContinuity::default();
        let c = choose_lambda(&w, 1e-8, 2.0).unwrap();
        assert!((c.lambda - 1.5 * 2.0).abs() < 1e-3);
        assert!(w.eval(c.c0) > 2e-8);
    }

    #[test]
    fn linear_in_gradient() {
        let w = ModulusOfContinuity::default();
        let a = choose_lambda(&w, 2.5e-3, 0.7).unwrap();
        let b = choose_lambda(&w, 2.5e-3, 1.4).unwrap();
        assert!((b.lambda / a.lambda - 2.0).abs() < 1e-14);
        assert_eq!(a.c0, b.c0);
    }

    #[test]
    fn out_of_range_amplitude() {
        let w = ModulusOfContinuity::default();
        assert!(matches!(choose_lambda(&w, 1.0, 1.0), Err(Error::OmegaRange { .. })));
        assert!(choose_lambda(&w, 0.0, 1.0).is_err());
    }
}
