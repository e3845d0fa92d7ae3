use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{EvolutionConfig, Forcing};
use super::kernel::{max_speed, FrozenVelocity, Kernel, Nonlinear, Spec, Stepper};
use crate::error::{Error, Result};
use crate::lp::{build_partition, DyadicPartition};
use crate::spectral::{velocity_from_theta, Field, Grid2D, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    /// `v` reconstructed from `θ` at every stage.
    Qg,
    /// Prescribed `v`.
    Td,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub grad_inf: f64,
    /// `‖θ‖_{Ḃ⁰_{∞,1}}`
    pub besov0: f64,
    /// `‖θ‖_{Ḃ¹_{∞,1}}`
    pub besov1: f64,
    /// `‖∇v(t)‖_∞` of the transporting velocity.
    pub grad_v: f64,
    /// `V(t) = ∫_0^t ‖∇v‖_∞`, trapezoid rule over the stored times.
    pub v_integral: f64,
    /// `‖Δ_q θ‖_∞` in increasing `q`.
    pub block_sups: Vec<f64>,
}

impl Diagnostics {
    pub(crate) fn measure(partition: &DyadicPartition, t: f64, u: &Field, grad_v: f64) -> Result<Self> {
        let d = partition.decompose(u)?;
        Ok(Self {
            t,
            l2: u.lp_norm(2.0),
            l4: u.lp_norm(4.0),
            linf: u.sup_norm(),
            grad_inf: u.grad_sup(),
            besov0: d.besov(0.0, f64::INFINITY, 1.0).value,
            besov1: d.besov(1.0, f64::INFINITY, 1.0).value,
            grad_v,
            v_integral: 0.0,
            block_sups: d.blocks.iter().map(|b| b.norm_inf).collect(),
        })
    }
}

fn accumulate_v(diags: &mut [Diagnostics]) {
    let mut acc = 0.0;
    for i in 0..diags.len() {
        if i > 0 {
            acc += 0.5 * (diags[i].t - diags[i - 1].t) * (diags[i].grad_v + diags[i - 1].grad_v);
        }
        diags[i].v_integral = acc;
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: RunKind,
    pub alpha: f64,
    pub kappa: f64,
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub diagnostics: Vec<Diagnostics>,
    /// Dyadic indices of `Diagnostics::block_sups`.
    pub qs: Vec<i32>,
    /// Time at which `‖∇θ‖_∞` passed the ceiling, if it did.
    pub blowup: Option<f64>,
    /// Largest number of CFL halvings any step needed.
    pub halvings: u32,
    pub velocity: Option<VectorField>,
    pub forcing: Option<Forcing>,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid2D {
        self.states[0].grid()
    }

    pub fn initial(&self) -> &Field {
        &self.states[0]
    }

    pub fn last(&self) -> &Field {
        self.states.last().expect("trajectories are never empty")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectories are never empty")
    }

    /// Forcing sampled on the stored times; zero fields when unforced.
    pub fn forcing_states(&self) -> Vec<Field> {
        self.times
            .iter()
            .map(|&t| match &self.forcing {
                Some(f) => f.at(t),
                None => Field::zeros(*self.grid()),
            })
            .collect()
    }

    /// Diagnostics rebuilt from the stored states alone.
    pub fn recompute_diagnostics(&self) -> Result<Vec<Diagnostics>> {
        let partition = build_partition(*self.grid())?;
        let frozen = self.velocity.as_ref().map(|v| v.grad_sup());
        let mut out = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(&t, u)| {
                let gv = match (self.kind, frozen) {
                    (RunKind::Td, Some(g)) => g,
                    (RunKind::Td, None) => 0.0,
                    (RunKind::Qg, _) => velocity_from_theta(u)?.grad_sup(),
                };
                Diagnostics::measure(&partition, t, u, gv)
            })
            .collect::<Result<Vec<_>>>()?;
        accumulate_v(&mut out);
        Ok(out)
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from("t,l2,l4,linf,grad_inf,besov0,besov1,V\n");
        for d in &self.diagnostics {
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                d.t, d.l2, d.l4, d.linf, d.grad_inf, d.besov0, d.besov1, d.v_integral
            );
        }
        s
    }
}

struct Qg {
    kernel: Arc<Kernel>,
    forcing: Option<Forcing>,
}

impl Nonlinear for Qg {
    fn eval(&mut self, t: f64, th: &[Complex64]) -> Result<(Spec, f64)> {
        let (v1, v2) = self.kernel.velocity_physical(th);
        let mut n = self.kernel.minus_advection(&v1, &v2, th);
        add_forcing(&self.kernel, &mut n, self.forcing.as_ref(), t);
        Ok((n, max_speed(&v1, &v2)))
    }
}

/// Transport by a velocity that does not depend on the state.
pub(crate) trait Drift {
    /// Samples `(v1, v2)` at time `t` and `max |v|`.
    fn at(&mut self, t: f64) -> Result<(Arc<Vec<f64>>, Arc<Vec<f64>>, f64)>;
}

pub(crate) struct Frozen {
    v1: Arc<Vec<f64>>,
    v2: Arc<Vec<f64>>,
    speed: f64,
}

impl Frozen {
    pub fn new(v: &VectorField) -> Result<Self> {
        let f = FrozenVelocity::new(v)?;
        Ok(Self {
            v1: Arc::new(f.v1),
            v2: Arc::new(f.v2),
            speed: f.speed,
        })
    }
}

impl Drift for Frozen {
    fn at(&mut self, _t: f64) -> Result<(Arc<Vec<f64>>, Arc<Vec<f64>>, f64)> {
        Ok((self.v1.clone(), self.v2.clone(), self.speed))
    }
}

pub(crate) struct Td<'a> {
    pub kernel: Arc<Kernel>,
    pub drift: &'a mut dyn Drift,
    pub forcing: Option<Forcing>,
}

impl Nonlinear for Td<'_> {
    fn eval(&mut self, t: f64, th: &[Complex64]) -> Result<(Spec, f64)> {
        let (v1, v2, speed) = self.drift.at(t)?;
        let mut n = self.kernel.minus_advection(&v1, &v2, th);
        add_forcing(&self.kernel, &mut n, self.forcing.as_ref(), t);
        Ok((n, speed))
    }
}

fn add_forcing(kernel: &Kernel, n: &mut [Complex64], forcing: Option<&Forcing>, t: f64) {
    if let Some(f) = forcing {
        let mut fs = f.spectral_at(t);
        kernel.project(&mut fs);
        n.iter_mut().zip(&fs).for_each(|(a, b)| *a += b);
    }
}

fn check_initial(theta0: &Field, cfg: &EvolutionConfig) -> Result<()> {
    if !theta0.is_mean_free() {
        return Err(Error::ZeroMode {
            op: "evolution".into(),
            zero_mode: theta0.zero_mode(),
        });
    }
    if let Some(f) = &cfg.forcing {
        theta0.grid().check_same(f.grid())?;
    }
    Ok(())
}

fn initial_spec(kernel: &Kernel, theta0: &Field) -> Spec {
    let mut s = theta0.spectral().to_vec();
    kernel.project(&mut s);
    s
}

fn grad_sup_spec(kernel: &Kernel, th: &[Complex64]) -> Result<f64> {
    Ok(kernel.field(th)?.grad_sup())
}

/// One macro step of the critical or dissipative QG equation.
pub fn step_qg(theta: &Field, cfg: &EvolutionConfig) -> Result<Field> {
    check_initial(theta, cfg)?;
    let mut stepper = Stepper::new(*theta.grid(), cfg)?;
    let mut nl = Qg {
        kernel: stepper.kernel.clone(),
        forcing: cfg.forcing.clone(),
    };
    let u = initial_spec(&stepper.kernel, theta);
    let next = stepper.advance(&u, 0.0, cfg.dt, &mut nl)?;
    stepper.kernel.field(&next)
}

/// One macro step of the linear transport–diffusion problem with frozen `v`
/// and source `f`.
pub fn step_td(theta: &Field, v: &VectorField, f: &Field, cfg: &EvolutionConfig) -> Result<Field> {
    check_initial(theta, cfg)?;
    theta.grid().check_same(v.grid())?;
    theta.grid().check_same(f.grid())?;
    let mut stepper = Stepper::new(*theta.grid(), cfg)?;
    let mut drift = Frozen::new(v)?;
    let mut nl = Td {
        kernel: stepper.kernel.clone(),
        drift: &mut drift,
        forcing: Some(Forcing::Steady(f.clone())),
    };
    let u = initial_spec(&stepper.kernel, theta);
    let next = stepper.advance(&u, 0.0, cfg.dt, &mut nl)?;
    stepper.kernel.field(&next)
}

/// Integrates the QG equation from `theta0` to `cfg.t_end`.
pub fn run(theta0: &Field, cfg: &EvolutionConfig) -> Result<Trajectory> {
    check_initial(theta0, cfg)?;
    let mut stepper = Stepper::new(*theta0.grid(), cfg)?;
    let mut nl = Qg {
        kernel: stepper.kernel.clone(),
        forcing: cfg.forcing.clone(),
    };
    integrate(theta0, cfg, &mut stepper, &mut nl, RunKind::Qg, None, |u| {
        Ok(velocity_from_theta(u)?.grad_sup())
    })
}

/// Integrates the transport–diffusion problem with frozen `v` and the
/// forcing of `cfg`.
pub fn run_td(theta0: &Field, v: &VectorField, cfg: &EvolutionConfig) -> Result<Trajectory> {
    check_initial(theta0, cfg)?;
    theta0.grid().check_same(v.grid())?;
    let mut stepper = Stepper::new(*theta0.grid(), cfg)?;
    let mut drift = Frozen::new(v)?;
    let grad_v = v.grad_sup();
    let mut nl = Td {
        kernel: stepper.kernel.clone(),
        drift: &mut drift,
        forcing: cfg.forcing.clone(),
    };
    integrate(theta0, cfg, &mut stepper, &mut nl, RunKind::Td, Some(v.clone()), |_| {
        Ok(grad_v)
    })
}

/// Time loop shared by every run: stores snapshots, measures them, and stops
/// at the gradient ceiling or on a non-finite state.
pub(crate) fn integrate(
    theta0: &Field,
    cfg: &EvolutionConfig,
    stepper: &mut Stepper,
    nl: &mut dyn Nonlinear,
    kind: RunKind,
    velocity: Option<VectorField>,
    grad_v: impl Fn(&Field) -> Result<f64>,
) -> Result<Trajectory> {
    let steps = cfg.step_count()?;
    let partition = build_partition(*theta0.grid())?;
    let kernel = stepper.kernel.clone();
    let mut u = initial_spec(&kernel, theta0);
    let first = kernel.field(&u)?;
    let mut times = vec![0.0];
    let mut diagnostics = vec![Diagnostics::measure(&partition, 0.0, &first, grad_v(&first)?)?];
    let mut states = vec![first];
    let mut blowup = None;
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let next = stepper.advance(&u, t, cfg.dt, nl)?;
        let t_next = (k + 1) as f64 * cfg.dt;
        if next.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite {
                t: t_next,
                last_good: Box::new(kernel.field(&u)?),
            });
        }
        u = next;
        let over = grad_sup_spec(&kernel, &u)? > cfg.ceiling;
        if (k + 1) % cfg.snapshot_every == 0 || k + 1 == steps || over {
            let f = kernel.field(&u)?;
            diagnostics.push(Diagnostics::measure(&partition, t_next, &f, grad_v(&f)?)?);
            states.push(f);
            times.push(t_next);
        }
        if over {
            blowup = Some(t_next);
            break;
        }
    }
    accumulate_v(&mut diagnostics);
    Ok(Trajectory {
        kind,
        alpha: cfg.alpha,
        kappa: cfg.kappa,
        times,
        states,
        diagnostics,
        qs: partition.q_range().collect(),
        blowup,
        halvings: stepper.halvings,
        velocity,
        forcing: cfg.forcing.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{apply_multiplier, Multiplier};
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(32, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let cfg = EvolutionConfig {
            t_end: 0.1,
            ..EvolutionConfig::default()
        };
        let tr = run(&Field::zeros(grid()), &cfg).unwrap();
        assert!(tr.states.iter().all(|s| s.sup_norm() == 0.0));
        assert_eq!(tr.times.len(), 11);
    }

    #[test]
    fn pure_dissipation_matches_semigroup() {
        // a single plane wave is a steady state of the nonlinearity
        let u = Field::from_fn(grid(), |x, _| (2.0 * x).cos()).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.05,
            t_end: 1.0,
            ..EvolutionConfig::default()
        };
        let tr = run(&u, &cfg).unwrap();
        assert!((tr.last().sup_norm() - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn stationary_balance() {
        let g = grid();
        let u = Field::from_fn(g, |x, y| (x + y).sin() + 0.5 * (2.0 * y).cos()).unwrap();
        let f = apply_multiplier(&u, Multiplier::FracLap(1.0)).unwrap();
        let cfg = EvolutionConfig {
            dt: 0.1,
            t_end: 0.1,
            ..EvolutionConfig::default()
        };
        let out = step_td(&u, &VectorField::zeros(g), &f, &cfg).unwrap();
        assert!(out.max_abs_diff(&u) < 1e-13);
    }

    #[test]
    fn divergent_velocity_rejected() {
        let g = grid();
        let v = VectorField::new(Field::from_fn(g, |x, _| x.sin()).unwrap(), Field::zeros(g)).unwrap();
        let u = Field::from_fn(g, |x, _| x.cos()).unwrap();
        assert!(matches!(
            step_td(&u, &v, &Field::zeros(g), &EvolutionConfig::default()),
            Err(Error::NotDivergenceFree { .. })
        ));
    }

    #[test]
    fn mean_is_required_and_kept_zero() {
        let g = grid();
        assert!(run(&Field::constant(g, 1.0), &EvolutionConfig::default()).is_err());
        let u = Field::from_fn(g, |x, y| (x + 2.0 * y).sin() * (y).cos() + (3.0 * x).cos()).unwrap();
        let cfg = EvolutionConfig {
            t_end: 0.2,
            ..EvolutionConfig::default()
        };
        let tr = run(&u, &cfg).unwrap();
        assert!(tr.states.iter().all(|s| s.spectral()[0].norm() == 0.0));
    }

    #[test]
    fn diagnostics_recompute() {
        let g = grid();
        let u = Field::from_fn(g, |x, y| 0.3 * (x + 2.0 * y).sin() + 0.2 * (3.0 * x - y).cos()).unwrap();
        let cfg = EvolutionConfig {
            t_end: 0.2,
            snapshot_every: 5,
            ..EvolutionConfig::default()
        };
        let tr = run(&u, &cfg).unwrap();
        assert_eq!(tr.times.len(), 5);
        assert!((tr.times[3] - 0.15).abs() < 1e-15);
        let again = tr.recompute_diagnostics().unwrap();
        for (a, b) in tr.diagnostics.iter().zip(&again) {
            assert!((a.besov1 - b.besov1).abs() <= 1e-10 * a.besov1);
            assert!((a.v_integral - b.v_integral).abs() <= 1e-10 * a.v_integral.max(1e-300));
        }
    }

    #[test]
    fn ceiling_halts_run() {
        let u = Field::from_fn(grid(), |x, y| (x + y).sin()).unwrap();
        let cfg = EvolutionConfig {
            ceiling: 0.5,
            ..EvolutionConfig::default()
        };
        let tr = run(&u, &cfg).unwrap();
        assert_eq!(tr.blowup, Some(0.01));
        assert_eq!(tr.times.len(), 2);
    }
}
