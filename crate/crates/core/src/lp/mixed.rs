use serde::{Deserialize, Serialize};

use super::besov::{check_exponent, lm_norm};
use super::partition::build_partition;
use crate::error::{Error, Result};
use crate::spectral::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixedVariant {
    /// `ℓ^m_q L^r_t`: time norm inside the block sum.
    Tilde,
    /// `L^r_t ℓ^m_q`: time norm of the spatial Besov norm.
    Plain,
}

/// Per-block `L^p` norms sampled on a uniform time grid. Rows are times,
/// columns follow `qs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSeries {
    pub times: Vec<f64>,
    pub qs: Vec<i32>,
    pub norms: Vec<Vec<f64>>,
}

impl BlockSeries {
    pub fn from_states(times: &[f64], states: &[Field], p: f64) -> Result<Self> {
        if states.is_empty() || times.len() != states.len() {
            return Err(Error::EmptyTrajectory);
        }
        let partition = build_partition(*states[0].grid())?;
        let norms = states
            .iter()
            .map(|u| {
                let d = partition.decompose(u)?;
                Ok(d.blocks.iter().map(|b| b.lp_norm(p)).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Self {
            times: times.to_vec(),
            qs: partition.q_range().collect(),
            norms,
        })
    }

    /// `‖·‖_{L^r_t}` of `2^{qs}‖Δ_q u(t)‖_p` for every block.
    fn block_time_norms(&self, s: f64, r: f64) -> Vec<f64> {
        (0..self.qs.len())
            .map(|c| {
                let w = 2f64.powf(self.qs[c] as f64 * s);
                let col: Vec<f64> = self.norms.iter().map(|row| w * row[c]).collect();
                time_norm(&self.times, &col, r)
            })
            .collect()
    }

    pub fn mixed_norm(&self, r: f64, s: f64, m: f64, variant: MixedVariant) -> Result<f64> {
        if self.times.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        check_uniform(&self.times)?;
        check_time_exponent(r)?;
        check_exponent("m", m)?;
        Ok(match variant {
            MixedVariant::Tilde => lm_norm(self.block_time_norms(s, r), m),
            MixedVariant::Plain => {
                let spatial: Vec<f64> = self
                    .norms
                    .iter()
                    .map(|row| lm_norm(row.iter().zip(&self.qs).map(|(v, &q)| 2f64.powf(q as f64 * s) * v), m))
                    .collect();
                time_norm(&self.times, &spatial, r)
            }
        })
    }
}

/// Space–time Besov norm of a sampled trajectory.
pub fn mixed_norm(
    times: &[f64],
    states: &[Field],
    r: f64,
    s: f64,
    p: f64,
    m: f64,
    variant: MixedVariant,
) -> Result<f64> {
    check_exponent("p", p)?;
    BlockSeries::from_states(times, states, p)?.mixed_norm(r, s, m, variant)
}

fn check_time_exponent(r: f64) -> Result<()> {
    if r == 1.0 || r == 2.0 || r.is_infinite() {
        Ok(())
    } else {
        Err(Error::out_of_range("r", r, "{1, 2, ∞}"))
    }
}

pub(crate) fn check_uniform(times: &[f64]) -> Result<()> {
    if times.len() < 3 {
        return if times.windows(2).all(|w| w[1] > w[0]) {
            Ok(())
        } else {
            Err(Error::NonUniformTime)
        };
    }
    let h = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300) && w[1] > w[0]);
    if uniform {
        Ok(())
    } else {
        Err(Error::NonUniformTime)
    }
}

/// `L^r` norm over time by the trapezoid rule; `r = ∞` is the maximum.
pub fn time_norm(times: &[f64], values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let integral: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].abs().powf(r) + v[1].abs().powf(r)))
        .sum();
    integral.powf(1.0 / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::besov_norm;
    use crate::spectral::Grid2D;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(32, 2.0 * PI).unwrap()
    }

    #[test]
    fn constant_trajectory_sup_equals_besov() {
        let u = Field::from_fn(grid(), |x, y| (x + 2.0 * y).sin() + 0.3 * (4.0 * x).cos()).unwrap();
        let times = [0.0, 0.5, 1.0];
        let states = vec![u.clone(), u.clone(), u.clone()];
        let b = besov_norm(&u, 0.5, f64::INFINITY, 1.0).unwrap().value;
        for v in [MixedVariant::Tilde, MixedVariant::Plain] {
            let m = mixed_norm(&times, &states, f64::INFINITY, 0.5, f64::INFINITY, 1.0, v).unwrap();
            assert!((m - b).abs() < 1e-14 * b);
        }
    }

    #[test]
    fn single_block_variants_coincide() {
        let times = [0.0, 0.1, 0.2, 0.3];
        let states: Vec<Field> = times
            .iter()
            .map(|t| Field::from_fn(grid(), |x, _| (1.0 + t) * (4.0 * x).cos()).unwrap())
            .collect();
        for r in [1.0, 2.0, f64::INFINITY] {
            let a = mixed_norm(&times, &states, r, 0.0, 2.0, 1.0, MixedVariant::Tilde).unwrap();
            let b = mixed_norm(&times, &states, r, 0.0, 2.0, 1.0, MixedVariant::Plain).unwrap();
            assert!((a - b).abs() < 1e-13 * a);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            mixed_norm(&[], &[], 1.0, 0.0, 2.0, 1.0, MixedVariant::Plain),
            Err(Error::EmptyTrajectory)
        ));
        let u = Field::zeros(grid());
        let states = vec![u.clone(), u.clone(), u];
        assert!(matches!(
            mixed_norm(&[0.0, 0.1, 0.3], &states, 1.0, 0.0, 2.0, 1.0, MixedVariant::Plain),
            Err(Error::NonUniformTime)
        ));
        assert!(mixed_norm(&[0.0, 0.1, 0.2], &states, 3.0, 0.0, 2.0, 1.0, MixedVariant::Plain).is_err());
    }

    #[test]
    fn trapezoid_time_norm() {
        let t = [0.0, 0.5, 1.0];
        assert!((time_norm(&t, &[1.0, 1.0, 1.0], 1.0) - 1.0).abs() < 1e-15);
        assert!((time_norm(&t, &[0.0, 1.0, 2.0], 2.0) - 1.5f64.sqrt()).abs() < 1e-15);
    }
}
