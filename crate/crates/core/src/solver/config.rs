use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{check_alpha, Field};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Etdrk4,
    /// First-order: explicit nonlinear term, implicit dissipation.
    Imex,
}

/// Right-hand side `f` of the forced equations.
#[derive(Clone, Debug)]
pub enum Forcing {
    Steady(Field),
    /// Piecewise-linear in time between the given samples, constant outside.
    Series {
        times: Vec<f64>,
        fields: Vec<Field>,
    },
}

impl Forcing {
    pub fn series(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::EmptyTrajectory);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonUniformTime);
        }
        for f in &fields[1..] {
            fields[0].grid().check_same(f.grid())?;
        }
        Ok(Forcing::Series { times, fields })
    }

    pub fn at(&self, t: f64) -> Field {
        match self {
            Forcing::Steady(f) => f.clone(),
            Forcing::Series { times, fields } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    return fields[0].clone();
                }
                if k == times.len() {
                    return fields[k - 1].clone();
                }
                let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
                fields[k - 1]
                    .axpby(1.0 - w, &fields[k], w)
                    .expect("grids checked at construction")
            }
        }
    }

    pub(crate) fn spectral_at(&self, t: f64) -> Vec<Complex64> {
        match self {
            Forcing::Steady(f) => f.spectral().to_vec(),
            Forcing::Series { .. } => self.at(t).spectral().to_vec(),
        }
    }

    pub fn grid(&self) -> &crate::spectral::Grid2D {
        match self {
            Forcing::Steady(f) => f.grid(),
            Forcing::Series { fields, .. } => fields[0].grid(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Dissipation exponent in `(0, 2]`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Store a snapshot every this many steps (the initial state is always
    /// stored, and so is the final one).
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    /// Halt with the blow-up flag once `‖∇θ‖_∞` exceeds this.
    #[serde(default = "default_ceiling")]
    pub ceiling: f64,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: u32,
    #[serde(skip)]
    pub forcing: Option<Forcing>,
}

fn default_alpha() -> f64 {
    1.0
}
fn default_kappa() -> f64 {
    1.0
}
fn default_cfl() -> f64 {
    0.5
}
fn default_snapshot_every() -> usize {
    1
}
fn default_ceiling() -> f64 {
    1e3
}
fn default_max_halvings() -> u32 {
    10
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            kappa: 1.0,
            dt: 1e-2,
            t_end: 1.0,
            integrator: Integrator::Etdrk4,
            cfl: 0.5,
            snapshot_every: 1,
            ceiling: 1e3,
            max_halvings: 10,
            forcing: None,
        }
    }
}

impl EvolutionConfig {
    pub fn with_forcing(mut self, f: Forcing) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::out_of_range("kappa", self.kappa, "[0, ∞)"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::out_of_range("dt", self.dt, "(0, ∞)"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::NegativeTime(self.t_end));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::out_of_range("cfl", self.cfl, "(0, ∞)"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::out_of_range("snapshot_every", 0.0, "at least 1"));
        }
        if self.max_halvings > 30 {
            return Err(Error::out_of_range(
                "max_halvings",
                self.max_halvings as f64,
                "at most 30",
            ));
        }
        Ok(())
    }

    /// Number of macro steps to reach `t_end`; `t_end` must be a whole
    /// number of steps up to rounding.
    pub fn step_count(&self) -> Result<usize> {
        let steps = (self.t_end / self.dt).round();
        if ((steps * self.dt) - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::out_of_range(
                "t_end / dt",
                self.t_end / self.dt,
                "a whole number of steps",
            ));
        }
        Ok(steps as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;

    #[test]
    fn defaults_validate() {
        EvolutionConfig::default().validate().unwrap();
        assert_eq!(EvolutionConfig::default().step_count().unwrap(), 100);
    }

    #[test]
    fn rejects_ragged_horizon() {
        let c = EvolutionConfig {
            dt: 0.3,
            t_end: 1.0,
            ..EvolutionConfig::default()
        };
        assert!(c.step_count().is_err());
        let c = EvolutionConfig {
            alpha: 2.5,
            ..EvolutionConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn series_forcing_interpolates() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let a = Field::zeros(g);
        let b = Field::from_fn(g, |x, _| (2.0 * std::f64::consts::PI * x).sin()).unwrap();
        let f = Forcing::series(vec![0.0, 1.0], vec![a, b.clone()]).unwrap();
        assert!(f.at(0.5).max_abs_diff(&b.scale(0.5)) < 1e-15);
        assert!(f.at(3.0).max_abs_diff(&b) == 0.0);
    }
}
