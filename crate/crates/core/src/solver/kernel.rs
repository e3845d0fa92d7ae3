//! Spectral right-hand sides and the exponential integrators that advance
//! them. States are coefficient vectors kept inside the 2/3-rule band with a
//! zero mean.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::config::{EvolutionConfig, Integrator};
use crate::error::{Error, Result};
use crate::spectral::{Fft2, Field, Grid2D, Multiplier, VectorField};

pub(crate) type Spec = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) struct Kernel {
    pub grid: Grid2D,
    fft: Arc<Fft2>,
    ik1: Vec<Complex64>,
    ik2: Vec<Complex64>,
    r1: Vec<Complex64>,
    r2: Vec<Complex64>,
    retained: Vec<bool>,
}

impl Kernel {
    pub fn new(grid: Grid2D) -> Self {
        let gain = |m: Multiplier| -> Vec<Complex64> { (0..grid.len()).map(|i| m.gain(&grid, i)).collect() };
        Self {
            fft: Fft2::cached(grid.n()),
            ik1: gain(Multiplier::D1),
            ik2: gain(Multiplier::D2),
            r1: gain(Multiplier::Riesz1),
            r2: gain(Multiplier::Riesz2),
            retained: (0..grid.len()).map(|i| grid.is_retained(i)).collect(),
            grid,
        }
    }

    pub fn project(&self, s: &mut [Complex64]) {
        for (c, keep) in s.iter_mut().zip(&self.retained) {
            if !keep {
                *c = ZERO;
            }
        }
        s[0] = ZERO;
    }

    /// Samples of two real fields from one complex transform of `a + i b`.
    pub fn physical_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut buf: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re))
            .collect();
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// `v = (−R2 θ, R1 θ)` in coefficients.
    pub fn velocity_hat(&self, th: &[Complex64]) -> (Spec, Spec) {
        let v1 = th.iter().zip(&self.r2).map(|(c, r)| -c * r).collect();
        let v2 = th.iter().zip(&self.r1).map(|(c, r)| c * r).collect();
        (v1, v2)
    }

    pub fn velocity_physical(&self, th: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.velocity_hat(th);
        self.physical_pair(&a, &b)
    }

    /// Projected `−(v·∇θ)` for sampled `v`.
    pub fn minus_advection(&self, v1: &[f64], v2: &[f64], th: &[Complex64]) -> Spec {
        let d1: Spec = th.iter().zip(&self.ik1).map(|(c, g)| c * g).collect();
        let d2: Spec = th.iter().zip(&self.ik2).map(|(c, g)| c * g).collect();
        let (g1, g2) = self.physical_pair(&d1, &d2);
        let mut prod: Spec = (0..g1.len())
            .map(|i| Complex64::new(-(v1[i] * g1[i] + v2[i] * g2[i]), 0.0))
            .collect();
        self.fft.forward(&mut prod);
        self.project(&mut prod);
        prod
    }

    pub fn field(&self, s: &[Complex64]) -> Result<Field> {
        Field::from_spectral(self.grid, s.to_vec())
    }
}

pub(crate) fn max_speed(v1: &[f64], v2: &[f64]) -> f64 {
    v1.iter().zip(v2).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
}

/// Band-limited, mean-free samples of a prescribed velocity.
pub(crate) struct FrozenVelocity {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub speed: f64,
}

impl FrozenVelocity {
    pub fn new(v: &VectorField) -> Result<Self> {
        let div = v.relative_divergence();
        if div > 1e-10 {
            return Err(Error::NotDivergenceFree { max_div: div });
        }
        let (a, b) = (v.v1.dealiased(), v.v2.dealiased());
        let v1 = a.physical().to_vec();
        let v2 = b.physical().to_vec();
        let speed = max_speed(&v1, &v2);
        Ok(Self { v1, v2, speed })
    }
}

/// `φ_0..φ_3` at real `z ≤ 0`.
fn phi_functions(z: f64) -> [f64; 4] {
    if z.abs() < 1.0 {
        let mut out = [0.0; 4];
        for (k, o) in out.iter_mut().enumerate() {
            // Σ_j z^j / (j + k)!
            let mut term = 1.0 / (1..=k).map(|i| i as f64).product::<f64>();
            let mut sum = term;
            for j in 1..40 {
                term *= z / (j + k) as f64;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *o = sum;
        }
        out
    } else {
        let p0 = z.exp();
        let p1 = (p0 - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p0, p1, p2, p3]
    }
}

/// Per-mode ETDRK4 weights for one step size.
struct EtdCoeffs {
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

impl EtdCoeffs {
    fn new(lin: &[f64], h: f64) -> Self {
        let n = lin.len();
        let mut c = EtdCoeffs {
            e: vec![0.0; n],
            e2: vec![0.0; n],
            q: vec![0.0; n],
            f1: vec![0.0; n],
            f2: vec![0.0; n],
            f3: vec![0.0; n],
        };
        let mut memo: HashMap<u64, ([f64; 4], [f64; 4])> = HashMap::new();
        for (i, &l) in lin.iter().enumerate() {
            let z = h * l;
            let (full, half) = *memo
                .entry(z.to_bits())
                .or_insert_with(|| (phi_functions(z), phi_functions(0.5 * z)));
            c.e[i] = full[0];
            c.e2[i] = half[0];
            c.q[i] = 0.5 * h * half[1];
            c.f1[i] = h * (full[1] - 3.0 * full[2] + 4.0 * full[3]);
            c.f2[i] = h * (full[2] - 2.0 * full[3]);
            c.f3[i] = h * (-full[2] + 4.0 * full[3]);
        }
        c
    }
}

/// Nonlinear part `N(t, θ̂)` plus the speed `max |v|` that limits the step.
pub(crate) trait Nonlinear {
    fn eval(&mut self, t: f64, th: &[Complex64]) -> Result<(Spec, f64)>;
}

pub(crate) struct Stepper {
    pub kernel: Arc<Kernel>,
    lin: Vec<f64>,
    integrator: Integrator,
    cfl: f64,
    max_halvings: u32,
    cache: HashMap<u64, EtdCoeffs>,
    pub halvings: u32,
}

impl Stepper {
    pub fn new(grid: Grid2D, cfg: &EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        let lin = (0..grid.len())
            .map(|i| -cfg.kappa * grid.wavenumber(i).powf(cfg.alpha))
            .collect();
        Ok(Self {
            kernel: Arc::new(Kernel::new(grid)),
            lin,
            integrator: cfg.integrator,
            cfl: cfg.cfl,
            max_halvings: cfg.max_halvings,
            cache: HashMap::new(),
            halvings: 0,
        })
    }

    /// Advances by exactly `dt`, in `2^j` equal substeps where `j` is the
    /// fewest halvings that satisfy the CFL bound at each substep start.
    pub fn advance(&mut self, th: &[Complex64], t: f64, dt: f64, nl: &mut dyn Nonlinear) -> Result<Spec> {
        let dx = self.kernel.grid.dx();
        let total: u64 = 1 << self.max_halvings;
        let mut done: u64 = 0;
        let mut level: u32 = 0;
        let mut u = th.to_vec();
        while done < total {
            let now = t + dt * (done as f64 / total as f64);
            let (n0, speed) = nl.eval(now, &u)?;
            // finer substeps must stay aligned with the remaining interval
            let mut h = dt / (1u64 << level) as f64;
            while speed * h > self.cfl * dx || !done.is_multiple_of(total >> level) {
                if level == self.max_halvings {
                    return Err(Error::CflAbort {
                        t: now,
                        halvings: level,
                    });
                }
                level += 1;
                h *= 0.5;
            }
            self.halvings = self.halvings.max(level);
            u = self.substep(&u, now, h, n0, nl)?;
            done += total >> level;
        }
        Ok(u)
    }

    fn substep(&mut self, u: &[Complex64], t: f64, h: f64, nu: Spec, nl: &mut dyn Nonlinear) -> Result<Spec> {
        match self.integrator {
            Integrator::Imex => Ok(u
                .iter()
                .zip(&nu)
                .zip(&self.lin)
                .map(|((a, b), l)| (a + b * h) / (1.0 - h * l))
                .collect()),
            Integrator::Etdrk4 => {
                let c = self
                    .cache
                    .entry(h.to_bits())
                    .or_insert_with(|| EtdCoeffs::new(&self.lin, h));
                let n = u.len();
                let a: Spec = (0..n).map(|i| u[i] * c.e2[i] + nu[i] * c.q[i]).collect();
                let (na, _) = nl.eval(t + 0.5 * h, &a)?;
                let b: Spec = (0..n).map(|i| u[i] * c.e2[i] + na[i] * c.q[i]).collect();
                let (nb, _) = nl.eval(t + 0.5 * h, &b)?;
                let cc: Spec = (0..n)
                    .map(|i| a[i] * c.e2[i] + (nb[i] * 2.0 - nu[i]) * c.q[i])
                    .collect();
                let (nc, _) = nl.eval(t + h, &cc)?;
                Ok((0..n)
                    .map(|i| u[i] * c.e[i] + nu[i] * c.f1[i] + (na[i] + nb[i]) * (2.0 * c.f2[i]) + nc[i] * c.f3[i])
                    .collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_branches_agree() {
        for z in [-0.999, -1.001] {
            let p = phi_functions(z);
            let q = phi_functions(z * (1.0 + 1e-9));
            for k in 0..4 {
                assert!((p[k] - q[k]).abs() < 1e-8);
            }
        }
        let p = phi_functions(0.0);
        assert_eq!(p, [1.0, 1.0, 0.5, 1.0 / 6.0]);
    }

    #[test]
    fn pair_transform_matches_separate() {
        let g = Grid2D::new(16, 6.0).unwrap();
        let a = Field::from_fn(g, |x, y| (x - 0.3 * y).sin()).unwrap();
        let b = Field::from_fn(g, |x, y| (2.0 * x + y).cos()).unwrap();
        let k = Kernel::new(g);
        let (pa, pb) = k.physical_pair(a.spectral(), b.spectral());
        for i in 0..g.len() {
            assert!((pa[i] - a.physical()[i]).abs() < 1e-13);
            assert!((pb[i] - b.physical()[i]).abs() < 1e-13);
        }
    }
}
