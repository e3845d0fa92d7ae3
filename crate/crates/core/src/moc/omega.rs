use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two-piece modulus `ω(ξ) = ξ − ξ^{3/2}` on `[0, δ]` and
/// `ω'(ξ) = γ / (ξ (4 + ln(ξ/δ)))` above `δ`, continued so that
/// `ω(ξ) = ω(δ) + γ ln(1 + ln(ξ/δ)/4)`.
///
/// `scale` evaluates the rescaled modulus `ω_λ(ξ) = ω(λξ)`; it is 1 for the
/// base modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusOfContinuity {
    pub delta: f64,
    pub gamma: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ModulusOfContinuity {
    fn default() -> Self {
        Self {
            delta: 1e-2,
            gamma: 1e-4,
            scale: 1.0,
        }
    }
}

impl ModulusOfContinuity {
    /// Requires `0 < γ < δ < 4/9` and `γ ≤ 4δ(1 − 3√δ/2)`; the last two keep
    /// the lower piece increasing and the kink at `δ` concave.
    pub fn new(delta: f64, gamma: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 4.0 / 9.0) {
            return Err(Error::out_of_range("delta", delta, "(0, 4/9)"));
        }
        if !(gamma > 0.0 && gamma < delta) {
            return Err(Error::out_of_range("gamma", gamma, format!("(0, delta = {delta})")));
        }
        let kink = 4.0 * delta * (1.0 - 1.5 * delta.sqrt());
        if gamma > kink {
            return Err(Error::out_of_range(
                "gamma",
                gamma,
                format!("at most 4δ(1 − 3√δ/2) = {kink} for concavity at δ"),
            ));
        }
        Ok(Self {
            delta,
            gamma,
            scale: 1.0,
        })
    }

    /// `ξ ↦ ω(λξ)`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            scale: self.scale * lambda,
            ..*self
        }
    }

    /// Kink of the rescaled modulus.
    pub fn kink(&self) -> f64 {
        self.delta / self.scale
    }

    fn base(&self, x: f64) -> f64 {
        if x <= self.delta {
            x - x * x.sqrt()
        } else {
            self.base_at_delta() + self.gamma * ((x / self.delta).ln() / 4.0).ln_1p()
        }
    }

    fn base_at_delta(&self) -> f64 {
        self.delta - self.delta * self.delta.sqrt()
    }

    fn base_deriv(&self, x: f64) -> f64 {
        if x <= self.delta {
            1.0 - 1.5 * x.sqrt()
        } else {
            self.gamma / (x * (4.0 + (x / self.delta).ln()))
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.base(self.scale * xi)
    }

    /// `(ω(ξ), ω'(ξ))`, the derivative taken from the left at `δ` and from the
    /// right at 0.
    pub fn omega_eval(&self, xi: f64) -> Result<(f64, f64)> {
        if !(xi >= 0.0) {
            return Err(Error::out_of_range("xi", xi, "[0, ∞)"));
        }
        Ok((self.eval(xi), self.deriv(xi)))
    }

    pub fn deriv(&self, xi: f64) -> f64 {
        self.scale * self.base_deriv(self.scale * xi)
    }

    /// Right derivative; differs from [`Self::deriv`] only at the kink.
    pub fn deriv_right(&self, xi: f64) -> f64 {
        let x = self.scale * xi;
        if x == self.delta {
            self.scale * self.gamma / (4.0 * self.delta)
        } else {
            self.deriv(xi)
        }
    }

    pub fn second_deriv(&self, xi: f64) -> f64 {
        let x = self.scale * xi;
        let s2 = self.scale * self.scale;
        if x <= self.delta {
            -0.75 * s2 / x.sqrt()
        } else {
            let l = 4.0 + (x / self.delta).ln();
            -s2 * self.gamma * (l + 1.0) / (x * x * l * l)
        }
    }

    /// `ω(b) − ω(a)` for `0 ≤ a ≤ b` without cancellation.
    pub fn increment(&self, a: f64, b: f64) -> f64 {
        self.base_step(self.scale * a, self.scale * (b - a))
    }

    /// `ω(a + h) − ω(a)` in base units, with the step carried separately so
    /// that steps below the resolution of `a` survive.
    fn base_step(&self, a: f64, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let d = self.delta;
        let b = a + h;
        if a >= d {
            let ratio = (h / a).ln_1p();
            self.gamma * (ratio / (4.0 + (a / d).ln())).ln_1p()
        } else if b <= d || d - a >= h {
            // b^{3/2} − a^{3/2} = h(a + √(ab) + b)/(√a + √b)
            let (sa, sb) = (a.sqrt(), b.sqrt());
            h - h * (a + sa * sb + b) / (sa + sb)
        } else {
            let to_kink = d - a;
            self.base_step(a, to_kink) + self.base_step(d, h - to_kink)
        }
    }

    /// `ω(ξ + h) + ω(ξ − h) − 2ω(ξ)` for `0 ≤ h ≤ ξ`, accurate as `h → 0`.
    pub fn second_difference(&self, xi: f64, h: f64) -> f64 {
        let x = self.scale * xi;
        let k = (self.scale * h).min(x);
        let (lo, hi) = (x - k, x + k);
        let d = self.delta;
        if hi <= d {
            -x * x.sqrt() * binomial_defect(k / x)
        } else if lo >= d {
            let t = k / x;
            let a = 4.0 + (x / d).ln();
            let inner = ((-t * t).ln_1p() + t.ln_1p() * (-t).ln_1p() / a) / a;
            self.gamma * inner.ln_1p()
        } else {
            self.base_step(x, k) - self.base_step(lo, k)
        }
    }

    /// `ω^{-1}(y)` in log form: returns `ln ξ`. Above `ω(δ)` the inverse is a
    /// double exponential, so only the logarithm is representable.
    pub fn ln_inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::OmegaRange {
                target: y,
                reason: "target must be positive and finite".into(),
            });
        }
        let top = self.base_at_delta();
        let ln_x = if y <= top {
            // ω' ≥ 1 − 3√δ/2 > 0 on [0, δ], Newton from the linear guess
            let mut x = y.min(self.delta);
            for _ in 0..100 {
                let f = x - x * x.sqrt() - y;
                let step = f / (1.0 - 1.5 * x.sqrt());
                x = (x - step).clamp(0.0, self.delta);
                if step.abs() <= 1e-16 * x {
                    break;
                }
            }
            x.ln()
        } else {
            let e = ((y - top) / self.gamma).exp_m1();
            if !e.is_finite() {
                return Err(Error::OmegaRange {
                    target: y,
                    reason: format!("ln ω^{{-1}} overflows: (y − ω(δ))/γ = {}", (y - top) / self.gamma),
                });
            }
            self.delta.ln() + 4.0 * e
        };
        Ok(ln_x - self.scale.ln())
    }

    pub fn inverse(&self, y: f64) -> Result<f64> {
        let l = self.ln_inverse(y)?;
        let x = l.exp();
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::OmegaRange {
                target: y,
                reason: format!("ω^{{-1}}(y) = e^{l:.3e} is not representable"),
            })
        }
    }
}

/// `(1 + t)^{3/2} + (1 − t)^{3/2} − 2` for `0 ≤ t ≤ 1`.
fn binomial_defect(t: f64) -> f64 {
    if t >= 0.5 {
        return (1.0 + t).powf(1.5) + (1.0 - t).powf(1.5) - 2.0;
    }
    // 2 Σ_{k even} C(3/2, k) t^k
    let t2 = t * t;
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    let mut k = 0.0;
    loop {
        coeff *= (1.5 - k) * (1.5 - k - 1.0) / ((k + 1.0) * (k + 2.0));
        power *= t2;
        k += 2.0;
        let term = coeff * power;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 400.0 {
            break;
        }
    }
    2.0 * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Quadrature;

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModulusOfContinuity::new(0.9, 0.9).is_err());
        assert!(ModulusOfContinuity::new(1e-2, 2e-2).is_err());
        assert!(ModulusOfContinuity::new(0.3, 0.25).is_err());
        assert!(ModulusOfContinuity::new(1e-2, 1e-4).is_ok());
        assert!(ModulusOfContinuity::default().omega_eval(-1.0).is_err());
    }

    #[test]
    fn values_at_zero_and_delta() {
        let w = ModulusOfContinuity::default();
        assert_eq!(w.omega_eval(0.0).unwrap(), (0.0, 1.0));
        let d = w.delta;
        let (v, dv) = w.omega_eval(d).unwrap();
        assert!((v - (d - d.powf(1.5))).abs() < 1e-17);
        assert!((dv - (1.0 - 1.5 * d.sqrt())).abs() < 1e-15);
        assert!((w.deriv_right(d) - w.gamma / (4.0 * d)).abs() < 1e-15);
        assert!((w.eval(d * (1.0 + 1e-12)) - v).abs() < 1e-15);
    }

    #[test]
    fn upper_piece_integrates_derivative() {
        let w = ModulusOfContinuity::new(0.01, 0.001).unwrap();
        let q = Quadrature::new(1e-15, 1e-13).integrate(
            |u: f64| {
                let eta = u.exp();
                w.gamma / (4.0 + (eta / w.delta).ln())
            },
            w.delta.ln(),
            0.0,
        );
        let expected = w.eval(w.delta) + q.value;
        assert!((w.eval(1.0) - expected).abs() < 1e-14);
    }

    #[test]
    fn second_derivative_blows_up() {
        let w = ModulusOfContinuity::default();
        for xi in [1e-8, 1e-5, 1e-3] {
            assert!(w.second_deriv(xi) <= -0.5 / xi.sqrt());
        }
    }

    #[test]
    fn increments_match_direct_differences() {
        let w = ModulusOfContinuity::default();
        for (a, b) in [(1e-3, 5e-3), (5e-3, 2e-2), (0.02, 3.0), (0.0, 0.1)] {
            let direct = w.eval(b) - w.eval(a);
            assert!((w.increment(a, b) - direct).abs() < 1e-15, "{a} {b}");
        }
    }

    #[test]
    fn second_difference_is_stable() {
        let w = ModulusOfContinuity::default();
        for xi in [1e-4, 3.0] {
            // ≈ h² ω''(ξ) as h → 0
            let h = 1e-9 * xi;
            let sd = w.second_difference(xi, h);
            let expect = h * h * w.second_deriv(xi);
            assert!((sd / expect - 1.0).abs() < 1e-6, "{xi}: {sd} vs {expect}");
            let h = 0.3 * xi;
            let direct = w.eval(xi + h) + w.eval(xi - h) - 2.0 * w.eval(xi);
            assert!((w.second_difference(xi, h) / direct - 1.0).abs() < 1e-9, "{xi}");
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let w = ModulusOfContinuity::default();
        for y in [1e-9, 1e-4, 5e-3, 9e-3, 9.5e-3] {
            let x = w.inverse(y).unwrap();
            assert!((w.eval(x) - y).abs() <= 1e-10 * y, "{y}");
        }
        assert!(matches!(w.inverse(1.0), Err(Error::OmegaRange { .. })));
        assert!(w.ln_inverse(0.012).unwrap() > 100.0);
    }

    #[test]
    fn scaling_commutes_with_evaluation() {
        let w = ModulusOfContinuity::default();
        let s = w.scaled(3.5);
        for xi in [1e-5, 2e-3, 0.7] {
            assert_eq!(s.eval(xi), w.eval(3.5 * xi));
            assert!((s.deriv(xi) - 3.5 * w.deriv(3.5 * xi)).abs() < 1e-15);
        }
        let y = 4e-3;
        assert!((s.inverse(y).unwrap() * 3.5 - w.inverse(y).unwrap()).abs() < 1e-15);
    }
}
