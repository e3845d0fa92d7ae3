//! Picard iteration for the critical equation: `θ_0(t) = e^{−t|D|}θ⁰`, then
//! `θ_{n+1}` solves the linear problem transported by `v_n = R^⊥θ_n`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::EvolutionConfig;
use super::kernel::{max_speed, Kernel, Spec, Stepper};
use super::trajectory::{integrate, Drift, RunKind, Td, Trajectory};
use crate::error::{Error, Result};
use crate::lp::{build_partition, mixed_norm, BlockSeries, MixedVariant};
use crate::spectral::{semigroup_apply, velocity_from_theta, Field};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    #[serde(default = "default_eps0")]
    pub epsilon0: f64,
    /// Decay constant `c` in the small-data condition.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Contraction threshold for successive Cauchy ratios.
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Horizon `T`; when absent it is chosen so the small-data sum is `ε₀/2`.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Longest horizon the automatic choice may return.
    #[serde(default = "default_max_horizon")]
    pub max_horizon: f64,
    /// Time steps per linear solve.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Stop once the Cauchy norm falls below this fraction of `‖θ⁰‖_{Ḃ⁰_{∞,1}}`.
    #[serde(default = "default_stop")]
    pub stop_relative: f64,
}

fn default_eps0() -> f64 {
    0.1
}
fn default_c() -> f64 {
    1.0
}
fn default_eta() -> f64 {
    0.9
}
fn default_max_horizon() -> f64 {
    1.0
}
fn default_steps() -> usize {
    40
}
fn default_stop() -> f64 {
    1e-12
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            epsilon0: default_eps0(),
            c: default_c(),
            eta: default_eta(),
            horizon: None,
            max_horizon: default_max_horizon(),
            steps: default_steps(),
            stop_relative: default_stop(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardState {
    pub n: usize,
    /// `‖θ_n − θ_{n−1}‖_{L̃^∞_T Ḃ⁰_{∞,1}}`; absent for `n = 0`.
    pub cauchy_norm: Option<f64>,
    /// Ratio of successive Cauchy norms.
    pub ratio: Option<f64>,
    /// `‖θ_n‖_{L̃²_T Ḃ^{1/2}_{∞,1}} + ‖θ_n‖_{L¹_T Ḃ¹_{∞,1}}`
    pub iterate_bound: f64,
    pub small_data_lhs: f64,
}

#[derive(Clone, Debug)]
pub struct PicardRun {
    pub horizon: f64,
    pub small_data_lhs: f64,
    pub states: Vec<PicardState>,
    /// Three consecutive ratios at most `η`.
    pub contraction: bool,
    /// Three consecutive ratios at least 1.
    pub non_contraction: bool,
    /// Cauchy norm reached the stopping threshold.
    pub converged: bool,
    /// Longest run of consecutive ratios at most `η`.
    pub consecutive: usize,
    pub last: Trajectory,
}

/// `Σ_q (1 − e^{−cT2^q})^{1/2} ‖Δ_q θ⁰‖_∞`.
pub fn small_data_lhs(theta0: &Field, horizon: f64, c: f64) -> Result<f64> {
    let d = build_partition(*theta0.grid())?.decompose(theta0)?;
    Ok(small_data_from_blocks(
        &d.blocks.iter().map(|b| (b.q, b.norm_inf)).collect::<Vec<_>>(),
        horizon,
        c,
    ))
}

fn small_data_from_blocks(blocks: &[(i32, f64)], horizon: f64, c: f64) -> f64 {
    blocks
        .iter()
        .map(|&(q, s)| (-(-c * horizon * 2f64.powi(q)).exp_m1()).sqrt() * s)
        .sum()
}

/// Horizon at which the small-data sum equals `target`, capped at
/// `max_horizon`; bisection in `ln T`.
pub fn choose_horizon(theta0: &Field, target: f64, c: f64, max_horizon: f64) -> Result<f64> {
    let d = build_partition(*theta0.grid())?.decompose(theta0)?;
    let blocks: Vec<(i32, f64)> = d.blocks.iter().map(|b| (b.q, b.norm_inf)).collect();
    if small_data_from_blocks(&blocks, max_horizon, c) <= target {
        return Ok(max_horizon);
    }
    let (mut lo, mut hi) = ((max_horizon * 1e-12).ln(), max_horizon.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if small_data_from_blocks(&blocks, mid.exp(), c) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo.exp())
}

/// `θ_n` sampled on a uniform grid, evaluated between nodes by cubic
/// Lagrange interpolation of the coefficients.
struct History {
    kernel: Arc<Kernel>,
    h: f64,
    states: Vec<Spec>,
    memo: Option<(f64, Arc<Vec<f64>>, Arc<Vec<f64>>, f64)>,
}

impl History {
    fn theta_at(&self, t: f64) -> Spec {
        let last = self.states.len() - 1;
        let x = (t / self.h).clamp(0.0, last as f64);
        let i = (x.floor() as usize).min(last);
        if (x - i as f64).abs() < 1e-12 || last < 3 {
            return self.states[i.min(last)].clone();
        }
        let start = i.saturating_sub(1).min(last - 3);
        let nodes: Vec<f64> = (start..start + 4).map(|k| k as f64).collect();
        let w: Vec<f64> = (0..4)
            .map(|a| {
                (0..4)
                    .filter(|&b| b != a)
                    .map(|b| (x - nodes[b]) / (nodes[a] - nodes[b]))
                    .product()
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.states[0].len()];
        for (a, wa) in w.iter().enumerate() {
            for (o, s) in out.iter_mut().zip(&self.states[start + a]) {
                *o += s * *wa;
            }
        }
        out
    }
}

impl Drift for History {
    fn at(&mut self, t: f64) -> Result<(Arc<Vec<f64>>, Arc<Vec<f64>>, f64)> {
        if let Some((tm, a, b, s)) = &self.memo {
            if *tm == t {
                return Ok((a.clone(), b.clone(), *s));
            }
        }
        let th = self.theta_at(t);
        let (v1, v2) = self.kernel.velocity_physical(&th);
        let speed = max_speed(&v1, &v2);
        let (a, b) = (Arc::new(v1), Arc::new(v2));
        self.memo = Some((t, a.clone(), b.clone(), speed));
        Ok((a, b, speed))
    }
}

fn iterate_bound(tr: &Trajectory) -> Result<f64> {
    let series = block_series(tr);
    Ok(series.mixed_norm(2.0, 0.5, 1.0, MixedVariant::Tilde)?
        + series.mixed_norm(1.0, 1.0, 1.0, MixedVariant::Tilde)?)
}

pub(crate) fn block_series(tr: &Trajectory) -> BlockSeries {
    BlockSeries {
        times: tr.times.clone(),
        qs: tr.qs.clone(),
        norms: tr.diagnostics.iter().map(|d| d.block_sups.clone()).collect(),
    }
}

fn cauchy(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let diffs = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| x.sub(y))
        .collect::<Result<Vec<_>>>()?;
    mixed_norm(
        &a.times,
        &diffs,
        f64::INFINITY,
        0.0,
        f64::INFINITY,
        1.0,
        MixedVariant::Tilde,
    )
}

fn heat_trajectory(theta0: &Field, cfg: &EvolutionConfig) -> Result<Trajectory> {
    let steps = cfg.step_count()?;
    let partition = build_partition(*theta0.grid())?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let u = semigroup_apply(theta0, t * cfg.kappa, cfg.alpha)?;
        let gv = velocity_from_theta(&u)?.grad_sup();
        diagnostics.push(super::trajectory::Diagnostics::measure(&partition, t, &u, gv)?);
        times.push(t);
        states.push(u);
    }
    Ok(Trajectory {
        kind: RunKind::Td,
        alpha: cfg.alpha,
        kappa: cfg.kappa,
        times,
        states,
        diagnostics,
        qs: partition.q_range().collect(),
        blowup: None,
        halvings: 0,
        velocity: None,
        forcing: None,
    })
}

/// Runs up to `n_max` Picard iterations on `[0, T]`.
pub fn picard_iterate(theta0: &Field, pc: &PicardConfig, n_max: usize) -> Result<PicardRun> {
    if !theta0.is_mean_free() {
        return Err(Error::ZeroMode {
            op: "picard".into(),
            zero_mode: theta0.zero_mode(),
        });
    }
    if pc.steps < 4 {
        return Err(Error::out_of_range("steps", pc.steps as f64, "at least 4"));
    }
    let horizon = match pc.horizon {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::NegativeTime(t)),
        None => choose_horizon(theta0, 0.5 * pc.epsilon0, pc.c, pc.max_horizon)?,
    };
    let lhs = small_data_lhs(theta0, horizon, pc.c)?;
    let cfg = EvolutionConfig {
        dt: horizon / pc.steps as f64,
        t_end: horizon,
        ..EvolutionConfig::default()
    };
    let scale = build_partition(*theta0.grid())?
        .decompose(theta0)?
        .besov(0.0, f64::INFINITY, 1.0)
        .value;

    let mut prev = heat_trajectory(theta0, &cfg)?;
    let mut states = vec![PicardState {
        n: 0,
        cauchy_norm: None,
        ratio: None,
        iterate_bound: iterate_bound(&prev)?,
        small_data_lhs: lhs,
    }];
    let (mut run_ok, mut run_bad, mut best) = (0usize, 0usize, 0usize);
    let mut converged = false;
    let mut last_cauchy: Option<f64> = None;
    for n in 1..=n_max {
        let mut stepper = Stepper::new(*theta0.grid(), &cfg)?;
        let mut drift = History {
            kernel: stepper.kernel.clone(),
            h: cfg.dt,
            states: prev
                .states
                .iter()
                .map(|s| {
                    let mut v = s.spectral().to_vec();
                    stepper.kernel.project(&mut v);
                    v
                })
                .collect(),
            memo: None,
        };
        let mut nl = Td {
            kernel: stepper.kernel.clone(),
            drift: &mut drift,
            forcing: None,
        };
        let next = integrate(theta0, &cfg, &mut stepper, &mut nl, RunKind::Td, None, |u| {
            Ok(velocity_from_theta(u)?.grad_sup())
        })?;
        let c = cauchy(&next, &prev)?;
        let ratio = last_cauchy.map(|p| if p == 0.0 { 0.0 } else { c / p });
        if let Some(r) = ratio {
            run_ok = if r <= pc.eta { run_ok + 1 } else { 0 };
            run_bad = if r >= 1.0 { run_bad + 1 } else { 0 };
            best = best.max(run_ok);
        }
        states.push(PicardState {
            n,
            cauchy_norm: Some(c),
            ratio,
            iterate_bound: iterate_bound(&next)?,
            small_data_lhs: lhs,
        });
        prev = next;
        last_cauchy = Some(c);
        if c <= pc.stop_relative * scale {
            converged = true;
            break;
        }
        if run_bad >= 3 {
            break;
        }
    }
    Ok(PicardRun {
        horizon,
        small_data_lhs: lhs,
        states,
        contraction: best >= 3,
        non_contraction: run_bad >= 3,
        converged,
        consecutive: best,
        last: prev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_converges_immediately() {
        let g = Grid2D::new(32, 2.0 * PI * 4.0).unwrap();
        let r = picard_iterate(&Field::zeros(g), &PicardConfig::default(), 5).unwrap();
        assert!(r.converged);
        assert_eq!(r.states.len(), 2);
        assert_eq!(r.states[1].cauchy_norm, Some(0.0));
    }

    #[test]
    fn horizon_hits_target() {
        let g = Grid2D::new(64, 2.0 * PI * 4.0).unwrap();
        let u = Field::from_fn(g, |x, y| 0.5 * (x / 2.0).sin() * (y / 4.0).cos()).unwrap();
        let t = choose_horizon(&u, 0.05, 1.0, 10.0).unwrap();
        assert!((small_data_lhs(&u, t, 1.0).unwrap() - 0.05).abs() < 1e-9);
    }

    #[test]
    fn small_single_mode_contracts() {
        let g = Grid2D::new(32, 2.0 * PI * 4.0).unwrap();
        let u = Field::from_fn(g, |x, y| 0.3 * (x / 2.0 + y / 4.0).sin() + 0.2 * (y / 2.0).cos()).unwrap();
        let r = picard_iterate(&u, &PicardConfig::default(), 8).unwrap();
        assert!(r.small_data_lhs <= 0.1);
        assert!(r.contraction, "{:?}", r.states);
        for s in &r.states[1..] {
            assert!(s.iterate_bound <= 2.0 * 0.1, "{s:?}");
        }
    }
}
