//! Flow maps `ψ_q` of the regularized field `S_{q−1}v`, with their first and
//! second derivatives carried along each particle path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::interp::{Bicubic, Jet};
use crate::error::{Error, Result};
use crate::lp::build_partition;
use crate::spectral::{operator_norm, Grid2D, VectorField};

/// Velocity samples in time; linear in between, constant outside.
#[derive(Clone, Debug)]
pub struct VelocitySeries {
    pub times: Vec<f64>,
    pub fields: Vec<VectorField>,
}

impl VelocitySeries {
    pub fn steady(v: VectorField) -> Self {
        Self {
            times: vec![0.0],
            fields: vec![v],
        }
    }

    pub fn new(times: Vec<f64>, fields: Vec<VectorField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::EmptyTrajectory);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonUniformTime);
        }
        for f in &fields[1..] {
            fields[0].grid().check_same(f.grid())?;
        }
        Ok(Self { times, fields })
    }

    pub fn grid(&self) -> &Grid2D {
        self.fields[0].grid()
    }

    /// Bracketing sample indices and the weight of the second one.
    fn bracket(&self, t: f64) -> (usize, usize, f64) {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            (0, 0, 0.0)
        } else if k == self.times.len() {
            (k - 1, k - 1, 0.0)
        } else {
            (k - 1, k, (t - self.times[k - 1]) / (self.times[k] - self.times[k - 1]))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// RK4 steps over `[0, t]` before any refinement.
    pub steps: usize,
    /// Step doublings allowed when the Jacobian drifts.
    pub max_refinements: u32,
    /// Largest accepted `|det ∇ψ − 1|`.
    pub jacobian_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            steps: 32,
            max_refinements: 3,
            jacobian_tol: 1e-3,
        }
    }
}

/// `ψ(t, ·)` and `ψ(t, ·)^{-1}` sampled at the grid points.
///
/// Matrices are row-major `[∂_x ψ¹, ∂_y ψ¹, ∂_x ψ², ∂_y ψ²]`; Hessians list
/// `(xx, xy, yy)` for the first component and then the second.
#[derive(Clone, Debug)]
pub struct FlowMap {
    pub grid: Grid2D,
    pub q: i32,
    pub t: f64,
    /// `∫₀^t ‖∇S_{q−1}v‖_∞`
    pub v_t: f64,
    /// `ψ(x) − x`
    pub forward: [Vec<f64>; 2],
    /// `ψ^{-1}(x) − x`
    pub inverse: [Vec<f64>; 2],
    pub forward_jacobian: Vec<[f64; 4]>,
    pub inverse_jacobian: Vec<[f64; 4]>,
    pub forward_hessian: Vec<[f64; 6]>,
    pub inverse_hessian: Vec<[f64; 6]>,
    /// RK4 steps actually used.
    pub steps: usize,
}

fn det(j: &[f64; 4]) -> f64 {
    j[0] * j[3] - j[1] * j[2]
}

fn norm(j: &[f64; 4]) -> f64 {
    operator_norm(j[0], j[1], j[2], j[3])
}

impl FlowMap {
    pub fn identity(grid: Grid2D, q: i32) -> Self {
        let n = grid.len();
        Self {
            grid,
            q,
            t: 0.0,
            v_t: 0.0,
            forward: [vec![0.0; n], vec![0.0; n]],
            inverse: [vec![0.0; n], vec![0.0; n]],
            forward_jacobian: vec![[1.0, 0.0, 0.0, 1.0]; n],
            inverse_jacobian: vec![[1.0, 0.0, 0.0, 1.0]; n],
            forward_hessian: vec![[0.0; 6]; n],
            inverse_hessian: vec![[0.0; 6]; n],
            steps: 0,
        }
    }

    /// `ψ(x)` for grid point `idx`.
    pub fn image(&self, idx: usize) -> (f64, f64) {
        let (x, y) = self.grid.point(idx);
        (x + self.forward[0][idx], y + self.forward[1][idx])
    }

    pub fn preimage(&self, idx: usize) -> (f64, f64) {
        let (x, y) = self.grid.point(idx);
        (x + self.inverse[0][idx], y + self.inverse[1][idx])
    }

    /// `max |det ∇ψ^{±1} − 1|`.
    pub fn jacobian_drift(&self) -> f64 {
        self.forward_jacobian
            .iter()
            .chain(&self.inverse_jacobian)
            .map(|j| (det(j) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `‖∇ψ‖_∞`, operator norm.
    pub fn grad_sup(&self) -> f64 {
        self.forward_jacobian.iter().map(norm).fold(0.0, f64::max)
    }

    /// `‖∇ψ^{-1}‖_∞`
    pub fn inverse_grad_sup(&self) -> f64 {
        self.inverse_jacobian.iter().map(norm).fold(0.0, f64::max)
    }

    /// `‖∇ψ^{ε}‖_∞` for `ε ∈ {−1, 0, 1}`; `ε = 0` is the identity.
    pub fn grad_sup_signed(&self, eps: i32) -> f64 {
        match eps.signum() {
            1 => self.grad_sup(),
            -1 => self.inverse_grad_sup(),
            _ => 1.0,
        }
    }

    /// `‖∇²ψ‖_∞`, largest entry.
    pub fn hessian_sup(&self) -> f64 {
        self.forward_hessian
            .iter()
            .flat_map(|h| h.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Smallest `C` with `e^{−CV} ≤ ‖∇ψ^{∓1}‖_∞ ≤ e^{CV}`; 0 when `V = 0`.
    pub fn gradient_exponent(&self) -> f64 {
        if self.v_t == 0.0 {
            return 0.0;
        }
        self.grad_sup().ln().abs().max(self.inverse_grad_sup().ln().abs()) / self.v_t
    }

    /// Hermite interpolant of one component of the forward displacement.
    fn forward_patch(&self, c: usize) -> Bicubic {
        let (fx, fy, fxy) = self
            .forward_jacobian
            .iter()
            .zip(&self.forward_hessian)
            .map(|(j, h)| {
                let (dx, dy) = if c == 0 { (j[0] - 1.0, j[1]) } else { (j[2], j[3] - 1.0) };
                (dx, dy, h[3 * c + 1])
            })
            .fold(
                (Vec::new(), Vec::new(), Vec::new()),
                |(mut a, mut b, mut d), (x, y, z)| {
                    a.push(x);
                    b.push(y);
                    d.push(z);
                    (a, b, d)
                },
            );
        Bicubic::from_parts(&self.grid, self.forward[c].clone(), fx, fy, fxy)
    }

    /// `max |ψ(ψ^{-1}(x)) − x|` over the grid, interpolating `ψ` between
    /// nodes.
    pub fn roundtrip_error(&self) -> f64 {
        let p = [self.forward_patch(0), self.forward_patch(1)];
        (0..self.grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x, y) = self.grid.point(idx);
                let (a, b) = self.preimage(idx);
                let (fa, fb) = (a + p[0].jet(a, b).v, b + p[1].jet(a, b).v);
                (fa - x).hypot(fb - y)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Jets of `S_{q−1}v` at each sample time.
struct Regularized {
    times: Vec<f64>,
    patches: Vec<[Bicubic; 2]>,
    series: VelocitySeries,
}

impl Regularized {
    fn jets(&self, t: f64, x: f64, y: f64) -> [Jet; 2] {
        let (a, b, w) = self.series.bracket(t);
        let at = |k: usize| [self.patches[k][0].jet(x, y), self.patches[k][1].jet(x, y)];
        if a == b || w == 0.0 {
            return at(a);
        }
        let (ja, jb) = (at(a), at(b));
        [Jet::lerp(ja[0], jb[0], w), Jet::lerp(ja[1], jb[1], w)]
    }
}

/// Particle state: position, Jacobian, Hessians.
type State = [f64; 12];

fn rhs(reg: &Regularized, t: f64, sign: f64, s: &State) -> State {
    let jets = reg.jets(t, s[0], s[1]);
    let mut out = [0.0; 12];
    let j = [[s[2], s[3]], [s[4], s[5]]];
    for i in 0..2 {
        let jet = &jets[i];
        out[i] = sign * jet.v;
        for col in 0..2 {
            out[2 + 2 * i + col] = sign * (jet.d[0] * j[0][col] + jet.d[1] * j[1][col]);
        }
        for (slot, (a, b)) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
            let mut acc = 0.0;
            for l in 0..2 {
                acc += jet.d[l] * s[6 + 3 * l + slot];
                for m in 0..2 {
                    acc += jet.h[l + m] * j[l][*a] * j[m][*b];
                }
            }
            out[6 + 3 * i + slot] = sign * acc;
        }
    }
    out
}

fn integrate_point(reg: &Regularized, x: f64, y: f64, t_end: f64, backward: bool, steps: usize) -> State {
    let mut s: State = [0.0; 12];
    s[0] = x;
    s[1] = y;
    s[2] = 1.0;
    s[5] = 1.0;
    let h = t_end / steps as f64;
    let (sign, clock) = if backward { (-1.0, -1.0) } else { (1.0, 1.0) };
    let start = if backward { t_end } else { 0.0 };
    let add = |a: &State, k: &State, w: f64| -> State {
        let mut o = *a;
        for i in 0..12 {
            o[i] += w * k[i];
        }
        o
    };
    for k in 0..steps {
        let t = start + clock * k as f64 * h;
        let k1 = rhs(reg, t, sign, &s);
        let k2 = rhs(reg, t + clock * 0.5 * h, sign, &add(&s, &k1, 0.5 * h));
        let k3 = rhs(reg, t + clock * 0.5 * h, sign, &add(&s, &k2, 0.5 * h));
        let k4 = rhs(reg, t + clock * h, sign, &add(&s, &k3, h));
        for i in 0..12 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    s
}

/// `∫₀^t g` for `g` linear between samples and constant outside.
fn integrate_piecewise_linear(times: &[f64], g: &[f64], t: f64) -> f64 {
    let at = |s: f64| -> f64 {
        let k = times.partition_point(|&x| x <= s);
        if k == 0 {
            g[0]
        } else if k == times.len() {
            g[k - 1]
        } else {
            let w = (s - times[k - 1]) / (times[k] - times[k - 1]);
            (1.0 - w) * g[k - 1] + w * g[k]
        }
    };
    let mut knots: Vec<f64> = std::iter::once(0.0)
        .chain(times.iter().copied().filter(|&s| s > 0.0 && s < t))
        .chain(std::iter::once(t))
        .collect();
    knots.dedup();
    knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (at(w[0]) + at(w[1])))
        .sum()
}

/// RK4 particle paths from every grid point through `S_{q−1}v`, forward to
/// `t` for `ψ` and backward from `t` for `ψ^{-1}`. Steps double while the
/// Jacobian determinant drifts beyond the tolerance.
pub fn integrate_flow(v: &VelocitySeries, q: i32, t: f64, opts: &FlowOptions) -> Result<FlowMap> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    if opts.steps == 0 {
        return Err(Error::out_of_range("steps", 0.0, "at least 1"));
    }
    let grid = *v.grid();
    let partition = build_partition(grid)?;
    if !partition.contains(q) {
        return Err(Error::out_of_range(
            "block index q",
            q as f64,
            format!("[{}, {}]", partition.q_min(), partition.q_max()),
        ));
    }
    let mut smoothed = Vec::with_capacity(v.fields.len());
    for f in &v.fields {
        let div = f.relative_divergence();
        if div > 1e-10 {
            return Err(Error::NotDivergenceFree { max_div: div });
        }
        // the mean is a constant drift and belongs to every low-pass piece
        let low = |u: &crate::spectral::Field| -> Result<crate::spectral::Field> {
            partition
                .low_pass(u, q - 1)?
                .add(&crate::spectral::Field::constant(grid, u.zero_mode()))
        };
        smoothed.push(VectorField::new(low(&f.v1)?, low(&f.v2)?)?);
    }
    let grads: Vec<f64> = smoothed.iter().map(VectorField::grad_sup).collect();
    let v_t = integrate_piecewise_linear(&v.times, &grads, t);
    if t == 0.0 {
        return Ok(FlowMap::identity(grid, q));
    }
    let reg = Regularized {
        times: v.times.clone(),
        patches: smoothed
            .iter()
            .map(|f| [Bicubic::from_field(&f.v1), Bicubic::from_field(&f.v2)])
            .collect(),
        series: VelocitySeries::new(v.times.clone(), smoothed)?,
    };
    debug_assert_eq!(reg.times.len(), reg.patches.len());

    let mut steps = opts.steps;
    for attempt in 0..=opts.max_refinements {
        let paths: Vec<(State, State)> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x, y) = grid.point(idx);
                (
                    integrate_point(&reg, x, y, t, false, steps),
                    integrate_point(&reg, x, y, t, true, steps),
                )
            })
            .collect();
        let mut map = FlowMap::identity(grid, q);
        map.t = t;
        map.v_t = v_t;
        map.steps = steps;
        for (idx, (f, b)) in paths.iter().enumerate() {
            let (x, y) = grid.point(idx);
            map.forward[0][idx] = f[0] - x;
            map.forward[1][idx] = f[1] - y;
            map.inverse[0][idx] = b[0] - x;
            map.inverse[1][idx] = b[1] - y;
            map.forward_jacobian[idx] = [f[2], f[3], f[4], f[5]];
            map.inverse_jacobian[idx] = [b[2], b[3], b[4], b[5]];
            map.forward_hessian[idx].copy_from_slice(&f[6..]);
            map.inverse_hessian[idx].copy_from_slice(&b[6..]);
        }
        let drift = map.jacobian_drift();
        if drift <= opts.jacobian_tol {
            return Ok(map);
        }
        if attempt == opts.max_refinements {
            return Err(Error::FlowDrift { drift, steps });
        }
        steps *= 2;
    }
    unreachable!("loop returns on its last attempt")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Field;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(64, 2.0 * PI * 8.0).unwrap()
    }

    /// Differential rotation about the box centre with angular velocity
    /// `Ω₀ e^{−r²/2σ²}`; particles keep their radius.
    fn vortex(g: Grid2D, omega0: f64, sigma: f64) -> VectorField {
        let c = g.length() / 2.0;
        let om = move |x: f64, y: f64| omega0 * (-((x - c).powi(2) + (y - c).powi(2)) / (2.0 * sigma * sigma)).exp();
        VectorField::new(
            Field::from_fn(g, move |x, y| -om(x, y) * (y - c)).unwrap(),
            Field::from_fn(g, move |x, y| om(x, y) * (x - c)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_velocity_is_identity() {
        let g = grid();
        let m = integrate_flow(
            &VelocitySeries::steady(VectorField::zeros(g)),
            0,
            0.5,
            &FlowOptions::default(),
        )
        .unwrap();
        assert_eq!(m.forward[0].iter().fold(0.0f64, |a, b| a.max(b.abs())), 0.0);
        assert_eq!(m.jacobian_drift(), 0.0);
        assert_eq!(m.v_t, 0.0);
    }

    #[test]
    fn rotation_matches_analytic_near_centre() {
        let g = Grid2D::new(128, 2.0 * PI * 8.0).unwrap();
        let (omega0, sigma) = (1.0, 3.0);
        let v = vortex(g, omega0, sigma);
        let t = 0.2;
        let m = integrate_flow(&VelocitySeries::steady(v), 3, t, &FlowOptions::default()).unwrap();
        let c = g.length() / 2.0;
        let mut worst = 0.0f64;
        for idx in 0..g.len() {
            let (x, y) = g.point(idx);
            let r = (x - c).hypot(y - c);
            if r > 2.0 {
                continue;
            }
            let ang = omega0 * (-r * r / (2.0 * sigma * sigma)).exp() * t;
            let (ex, ey) = (
                c + (x - c) * ang.cos() - (y - c) * ang.sin(),
                c + (x - c) * ang.sin() + (y - c) * ang.cos(),
            );
            let (px, py) = m.image(idx);
            worst = worst.max((px - ex).hypot(py - ey));
        }
        assert!(worst < 1e-6 * g.length(), "{worst}");
    }

    #[test]
    fn invariants_hold_for_a_cellular_flow() {
        let g = grid();
        let k = g.k0() * 2.0;
        let v = VectorField::new(
            Field::from_fn(g, |x, y| (k * x).sin() * (k * y).cos()).unwrap(),
            Field::from_fn(g, |x, y| -(k * x).cos() * (k * y).sin()).unwrap(),
        )
        .unwrap();
        let m = integrate_flow(&VelocitySeries::steady(v), 1, 1.0, &FlowOptions::default()).unwrap();
        assert!(m.jacobian_drift() < 1e-4, "{}", m.jacobian_drift());
        assert!(m.roundtrip_error() < 1e-4 * g.length(), "{}", m.roundtrip_error());
        let c = m.gradient_exponent();
        assert!(c.is_finite() && c > 0.0);
        assert!((m.v_t - k).abs() < 1e-6 * k);
    }

    #[test]
    fn piecewise_linear_integral() {
        let times = [0.0, 1.0, 2.0];
        let g = [1.0, 3.0, 3.0];
        assert!((integrate_piecewise_linear(&times, &g, 1.5) - (2.0 + 1.5)).abs() < 1e-15);
        assert!((integrate_piecewise_linear(&[0.0], &[2.0], 0.25) - 0.5).abs() < 1e-15);
    }
}
