//! The advective bound `Ω` (with unit constant) and the dissipative bound `I`.
//!
//! Both are sign-definite sums of sign-definite integrals, so the quadrature
//! runs on a purely relative tolerance. Semi-infinite ranges are cut at `H`
//! and the remainder is bracketed from the monotonicity of `ω` and `ω'`; the
//! midpoint of the bracket is added and its half-width counted as error.

use std::f64::consts::PI;

use super::omega::ModulusOfContinuity;
use crate::error::{Error, Result};
use crate::quadrature::{Quadrature, QuadratureResult};

const REL_TOL: f64 = 1e-10;
const TAIL_TOL: f64 = 1e-6;

fn quadrature() -> Quadrature {
    Quadrature {
        epsabs: 1e-300,
        epsrel: REL_TOL,
        max_subdivisions: 4000,
    }
}

/// `∫ f(η) dη` over `[a, b]` in the variable `u = ln η`.
fn integrate_log(f: impl Fn(f64) -> f64, a: f64, b: f64) -> QuadratureResult {
    quadrature().integrate(
        |u: f64| {
            let eta = u.exp();
            f(eta) * eta
        },
        a.ln(),
        b.ln(),
    )
}

/// Convergence is judged on the combined value: a negligible piece need not
/// meet the relative tolerance on its own.
fn checked(r: QuadratureResult, what: &str) -> Result<f64> {
    if r.error <= REL_TOL * r.value.abs() && r.value.is_finite() {
        Ok(r.value)
    } else {
        Err(Error::Quadrature {
            what: what.to_string(),
            achieved: r.error,
        })
    }
}

/// Smallest cut `H ≥ start` (by factors of `10^4`) whose tail bracket is
/// below `TAIL_TOL` of `reference`.
fn tail_cut(start: f64, reference: f64, gap: impl Fn(f64) -> f64, what: &str) -> Result<f64> {
    let mut h = start;
    for _ in 0..12 {
        if gap(h) <= TAIL_TOL * reference.abs() {
            return Ok(h);
        }
        h *= 1e4;
    }
    Err(Error::Quadrature {
        what: format!("{what}: tail remainder not certified"),
        achieved: gap(h) / reference.abs(),
    })
}

/// `∫_0^ξ ω(η)/η dη + ξ ∫_ξ^∞ ω(η)/η² dη`.
#[allow(non_snake_case)]
pub fn omega_Omega(moc: &ModulusOfContinuity, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::out_of_range("xi", xi, "(0, ∞)"));
    }
    let k = moc.kink();
    let s = moc.scale;
    let lower_closed = |x: f64| {
        let y = s * x;
        y - 2.0 / 3.0 * y * y.sqrt()
    };

    // near part: ω(η)/η = s(1 − √(sη)) below the kink
    let near = if xi <= k {
        lower_closed(xi)
    } else {
        let q = integrate_log(|eta| moc.eval(eta) / eta, k, xi);
        lower_closed(k) + checked(q, "Ω near integral")?
    };

    let kernel = |eta: f64| moc.eval(eta) / (eta * eta);
    let body_to = |h: f64| -> Result<f64> {
        let r = if xi < k {
            let a = integrate_log(kernel, xi, k);
            let b = integrate_log(kernel, k, h);
            QuadratureResult::combine(&[a, b])
        } else {
            integrate_log(kernel, xi, h)
        };
        checked(r, "Ω far integral")
    };
    // ∫_H^∞ ω/η² = ω(H)/H + ∫_H^∞ ω'(η)/η dη ∈ [ω(H)/H, (ω(H) + κ)/H]
    let kappa = |h: f64| moc.gamma / (4.0 + (s * h / moc.delta).ln());
    let start = 1e8 * xi.max(k);
    let h = tail_cut(start, near, |h| xi * kappa(h) / h, "Ω")?;
    let far = body_to(h)? + (moc.eval(h) + 0.5 * kappa(h)) / h;
    Ok(near + xi * far)
}

/// `(1/π)∫_0^{ξ/2} [ω(ξ+2η) + ω(ξ−2η) − 2ω(ξ)]/η² dη
///  + (1/π)∫_{ξ/2}^∞ [ω(2η+ξ) − ω(2η−ξ) − 2ω(ξ)]/η² dη`.
///
/// At the kink itself the first integrand behaves like `1/η` and the value is
/// `−∞`.
#[allow(non_snake_case)]
pub fn dissipation_I(moc: &ModulusOfContinuity, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::out_of_range("xi", xi, "(0, ∞)"));
    }
    let k = moc.kink();
    if moc.scale * xi == moc.delta {
        return Ok(f64::NEG_INFINITY);
    }
    let half = 0.5 * xi;

    let inner = |eta: f64| moc.second_difference(xi, 2.0 * eta) / (eta * eta);
    // ξ ± 2η crosses the kink at |ξ − k|/2 when that lies inside (0, ξ/2)
    let cross = 0.5 * (xi - k).abs();
    let first = if cross > 0.0 && cross < half {
        let a = quadrature().integrate(inner, 0.0, cross);
        let b = integrate_log(inner, cross, half);
        QuadratureResult::combine(&[a, b])
    } else {
        quadrature().integrate(inner, 0.0, half)
    };
    let first = checked(first, "I near integral")?;

    let w = moc.eval(xi);
    let outer = |eta: f64| (moc.increment((2.0 * eta - xi).max(0.0), 2.0 * eta + xi) - 2.0 * w) / (eta * eta);
    let mut points = vec![half];
    for b in [0.5 * (k - xi), 0.5 * (k + xi)] {
        if b > half {
            points.push(b);
        }
    }
    points.sort_by(f64::total_cmp);
    // ω(2η+ξ) − ω(2η−ξ) ∈ [0, 2ξ ω'(2η−ξ)], so the tail lies in
    // [−2ω(ξ)/H, −2ω(ξ)/H + 2ξ ω'(2H−ξ)/H]
    let gap = |h: f64| 2.0 * xi * moc.deriv(2.0 * h - xi) / h;
    let start = 1e8 * xi.max(k);
    let h = tail_cut(start, first.abs() + 2.0 * w / xi, gap, "I")?;
    points.push(h);
    let parts: Vec<QuadratureResult> = points.windows(2).map(|p| integrate_log(outer, p[0], p[1])).collect();
    let second = checked(QuadratureResult::combine(&parts), "I far integral")?;
    let tail = -2.0 * w / h + 0.5 * gap(h);
    Ok((first + second + tail) / PI)
}
