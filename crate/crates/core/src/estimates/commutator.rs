use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{build_partition, DyadicPartition};
use crate::report::ratio;
use crate::spectral::{advection, velocity_from_theta, Field, VectorField};

/// One block of a commutator sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub q: i32,
    /// `2^{qs}‖[Δ_q, v·∇]θ‖_∞`
    pub lhs: f64,
    pub rhs_factors: BTreeMap<String, f64>,
    pub ratio: f64,
}

impl CommutatorReport {
    fn new(q: i32, lhs: f64, rhs_factors: BTreeMap<String, f64>) -> Self {
        let ratio = ratio(lhs, rhs_factors.values().product());
        Self {
            q,
            lhs,
            rhs_factors,
            ratio,
        }
    }

    pub fn recompute_ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs_factors.values().product())
    }
}

fn check_velocity(v: &VectorField, theta: &Field) -> Result<()> {
    v.grid().check_same(theta.grid())?;
    let div = v.relative_divergence();
    if div > 1e-10 {
        return Err(Error::NotDivergenceFree { max_div: div });
    }
    Ok(())
}

/// Mean-free part of `v`. The constant part commutes with `Δ_q` exactly and
/// is dropped rather than computed.
fn fluctuation(v: &VectorField) -> Result<VectorField> {
    VectorField::new(v.v1.without_mean(), v.v2.without_mean())
}

fn block_with(partition: &DyadicPartition, v: &VectorField, theta: &Field, q: i32) -> Result<Field> {
    let w = fluctuation(v)?;
    let whole = partition.project(&advection(&w, theta)?, q)?.data;
    let inner = advection(&w, &partition.project(theta, q)?.data)?;
    whole.sub(&inner)
}

/// `[Δ_q, v·∇]θ = Δ_q(v·∇θ) − v·∇Δ_qθ`, both products dealiased.
pub fn commutator_block(v: &VectorField, theta: &Field, q: i32) -> Result<Field> {
    check_velocity(v, theta)?;
    let partition = build_partition(*theta.grid())?;
    block_with(&partition, v, theta, q)
}

/// Per-block terms of `Σ_q 2^{qs}‖[Δ_q, v·∇]θ‖_∞ ≲ ‖∇v‖_∞ ‖θ‖_{Ḃ^s_{∞,1}}`.
pub fn commutator_estimate_sweep(v: &VectorField, theta: &Field, s: f64) -> Result<Vec<CommutatorReport>> {
    if !(s > -1.0 && s < 1.0) {
        return Err(Error::out_of_range("s", s, "(−1, 1)"));
    }
    check_velocity(v, theta)?;
    sweep(v, theta, s, v.grad_sup())
}

/// The same sweep with `v = R^⊥θ` and `‖∇v‖_∞ + ‖∇θ‖_∞` on the right; any
/// `s ≥ 1` is allowed. Exploratory: the constant is not pinned down.
pub fn commutator_self_sweep(theta: &Field, s: f64) -> Result<Vec<CommutatorReport>> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::out_of_range("s", s, "[1, ∞)"));
    }
    let v = velocity_from_theta(theta)?;
    sweep(&v, theta, s, v.grad_sup() + theta.grad_sup())
}

fn sweep(v: &VectorField, theta: &Field, s: f64, grad: f64) -> Result<Vec<CommutatorReport>> {
    let partition = build_partition(*theta.grid())?;
    let besov = partition.decompose(theta)?.besov(s, f64::INFINITY, 1.0).value;
    partition
        .q_range()
        .map(|q| {
            let c = block_with(&partition, v, theta, q)?;
            let mut factors = BTreeMap::new();
            factors.insert("grad_v".to_string(), grad);
            factors.insert("besov_s".to_string(), besov);
            Ok(CommutatorReport::new(
                q,
                2f64.powf(q as f64 * s) * c.sup_norm(),
                factors,
            ))
        })
        .collect()
}

/// `Σ_q lhs_q / (‖∇v‖_∞‖θ‖_{Ḃ^s_{∞,1}})`.
pub fn commutator_ratio(reports: &[CommutatorReport]) -> f64 {
    reports.iter().map(|r| r.ratio).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, 2.0 * PI * 8.0).unwrap()
    }

    fn shear(g: Grid2D) -> VectorField {
        VectorField::new(
            Field::from_fn(g, |_, y| 0.7 * (y / 4.0).sin()).unwrap(),
            Field::zeros(g),
        )
        .unwrap()
    }

    #[test]
    fn constant_and_zero_velocity_commute() {
        let g = grid(64);
        let th = Field::from_fn(g, |x, y| (x / 2.0).sin() * (y / 4.0).cos() + (x / 8.0).cos()).unwrap();
        let c = VectorField::new(Field::constant(g, 0.3), Field::constant(g, -1.2)).unwrap();
        for q in -3..=2 {
            assert_eq!(commutator_block(&c, &th, q).unwrap().sup_norm(), 0.0);
            assert_eq!(
                commutator_block(&VectorField::zeros(g), &th, q).unwrap().sup_norm(),
                0.0
            );
        }
        let r = commutator_estimate_sweep(&VectorField::zeros(g), &th, 0.0).unwrap();
        assert_eq!(commutator_ratio(&r), 0.0);
    }

    #[test]
    fn matches_fine_grid_evaluation() {
        let g = grid(64);
        let fine = g.refined(2).unwrap();
        let th = |g| Field::from_fn(g, |x, y| (x / 2.0 + y / 8.0).cos()).unwrap();
        for q in -2..=1 {
            let coarse = commutator_block(&shear(g), &th(g), q).unwrap();
            let reference = commutator_block(&shear(fine), &th(fine), q).unwrap();
            let down = reference.downsample(2).unwrap();
            assert!(coarse.max_abs_diff(&down) < 1e-8, "q={q}");
        }
    }

    #[test]
    fn bilinear() {
        let g = grid(32);
        let a = Field::from_fn(g, |x, y| (x / 4.0 + y / 2.0).sin()).unwrap();
        let b = Field::from_fn(g, |x, _| (x / 2.0).cos()).unwrap();
        let v = shear(g);
        let lhs = commutator_block(&v, &a.axpby(2.0, &b, -0.5).unwrap(), 0).unwrap();
        let rhs = commutator_block(&v, &a, 0)
            .unwrap()
            .axpby(2.0, &commutator_block(&v, &b, 0).unwrap(), -0.5)
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn sweep_ratios_recompute() {
        let g = grid(64);
        let th = Field::from_fn(g, |x, y| (x / 2.0).sin() * (y / 4.0).cos()).unwrap();
        for s in [-0.9, 0.0, 0.9] {
            let r = commutator_estimate_sweep(&shear(g), &th, s).unwrap();
            for b in &r {
                assert_eq!(b.ratio, b.recompute_ratio());
            }
            assert!(commutator_ratio(&r).is_finite());
        }
        assert!(commutator_estimate_sweep(&shear(g), &th, 1.0).is_err());
        assert!(commutator_block(&shear(g), &th, 9).is_err());
    }
}
