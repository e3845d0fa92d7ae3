use num_complex::Complex64;

use super::fft::Fft2;
use super::field::Field;
use super::grid::Grid2D;
use super::multiplier::{apply_multiplier, Multiplier};
use crate::error::{Error, Result};

/// Velocity pair `(v1, v2)` sampled on a grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub v1: Field,
    pub v2: Field,
}

impl VectorField {
    pub fn new(v1: Field, v2: Field) -> Result<Self> {
        v1.grid().check_same(v2.grid())?;
        Ok(Self { v1, v2 })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            v1: Field::zeros(grid),
            v2: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.v1.grid()
    }

    pub fn scale(&self, a: f64) -> VectorField {
        VectorField {
            v1: self.v1.scale(a),
            v2: self.v2.scale(a),
        }
    }

    /// `max_x |v(x)|`.
    pub fn sup_norm(&self) -> f64 {
        self.v1
            .physical()
            .iter()
            .zip(self.v2.physical())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn divergence(&self) -> Field {
        let g = *self.grid();
        let a = apply_multiplier(&self.v1, Multiplier::D1).expect("derivatives accept any field");
        let b = apply_multiplier(&self.v2, Multiplier::D2).expect("derivatives accept any field");
        a.add(&b).unwrap_or_else(|_| Field::zeros(g))
    }

    /// `‖∇v‖_∞` with the Euclidean operator norm of the 2x2 Jacobian.
    pub fn grad_sup(&self) -> f64 {
        let (a11, a12) = self.v1.gradient();
        let (a21, a22) = self.v2.gradient();
        let mut m: f64 = 0.0;
        for idx in 0..self.grid().len() {
            m = m.max(operator_norm(
                a11.physical()[idx],
                a12.physical()[idx],
                a21.physical()[idx],
                a22.physical()[idx],
            ));
        }
        m
    }

    /// Largest `|div v|` relative to `max(1, ‖∇v‖_∞)`.
    pub fn relative_divergence(&self) -> f64 {
        self.divergence().sup_norm() / self.grad_sup().max(1.0)
    }

    pub fn is_finite(&self) -> bool {
        self.v1.is_finite() && self.v2.is_finite()
    }
}

/// Largest singular value of `[[a, b], [c, d]]`.
pub fn operator_norm(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let s1 = (a + d).hypot(c - b);
    let s2 = (a - d).hypot(c + b);
    0.5 * (s1 + s2)
}

/// `v = (-R2 θ, R1 θ)`.
pub fn velocity_from_theta(theta: &Field) -> Result<VectorField> {
    let v1 = apply_multiplier(theta, Multiplier::Riesz2)?.scale(-1.0);
    let v2 = apply_multiplier(theta, Multiplier::Riesz1)?;
    VectorField::new(v1, v2)
}

/// `exp(-t |D|^α) u`.
pub fn semigroup_apply(u: &Field, t: f64, alpha: f64) -> Result<Field> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    check_alpha(alpha)?;
    apply_multiplier(u, Multiplier::semigroup(t, alpha))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::out_of_range("alpha", alpha, "(0, 2]"))
    }
}

/// Pointwise product with the 2/3 rule applied to both factors and to the
/// result. Exact for inputs band-limited below `n/3`.
pub fn dealiased_product(u: &Field, w: &Field) -> Result<Field> {
    u.grid().check_same(w.grid())?;
    let grid = *u.grid();
    let a = truncated_samples(u);
    let b = truncated_samples(w);
    let prod: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x * y).collect();
    let mut spec = Fft2::cached(grid.n()).forward_real(&prod);
    truncate(&grid, &mut spec);
    Field::from_spectral(grid, spec)
}

fn truncated_samples(u: &Field) -> std::borrow::Cow<'_, [f64]> {
    if u.is_band_limited() {
        std::borrow::Cow::Borrowed(u.physical())
    } else {
        std::borrow::Cow::Owned(u.dealiased().physical().to_vec())
    }
}

/// Zeroes modes outside the retained band in place.
fn truncate(grid: &Grid2D, spec: &mut [Complex64]) {
    for (idx, c) in spec.iter_mut().enumerate() {
        if !grid.is_retained(idx) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// `v·∇θ` with dealiased products.
pub fn advection(v: &VectorField, theta: &Field) -> Result<Field> {
    v.grid().check_same(theta.grid())?;
    let (d1, d2) = theta.gradient();
    let a = dealiased_product(&v.v1, &d1)?;
    let b = dealiased_product(&v.v2, &d2)?;
    a.add(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn velocity_of_single_sine() {
        // θ = sin(x1): R1 θ = cos(x1), R2 θ = 0
        let g = Grid2D::new(16, 2.0 * PI).unwrap();
        let theta = Field::from_fn(g, |x, _| x.sin()).unwrap();
        let v = velocity_from_theta(&theta).unwrap();
        assert!(v.v1.sup_norm() < 1e-14);
        let expect = Field::from_fn(g, |x, _| x.cos()).unwrap();
        assert!(v.v2.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn zero_theta_gives_zero_velocity() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let v = velocity_from_theta(&Field::zeros(g)).unwrap();
        assert_eq!(v.sup_norm(), 0.0);
    }

    #[test]
    fn product_of_low_sines() {
        let g = Grid2D::new(8, 2.0 * PI).unwrap();
        let s = Field::from_fn(g, |x, _| x.sin()).unwrap();
        let p = dealiased_product(&s, &s).unwrap();
        let expect = Field::from_fn(g, |x, _| 0.5 - 0.5 * (2.0 * x).cos()).unwrap();
        assert!(p.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn product_with_one_is_identity() {
        let g = Grid2D::new(16, 2.0 * PI).unwrap();
        let w = Field::from_fn(g, |x, y| (2.0 * x - y).sin() + 0.4 * (3.0 * y).cos()).unwrap();
        let one = Field::constant(g, 1.0);
        let p = dealiased_product(&one, &w).unwrap();
        assert!(p.max_abs_diff(&w) < 1e-14);
    }

    #[test]
    fn product_rejects_grid_mismatch() {
        let a = Field::zeros(Grid2D::new(8, 1.0).unwrap());
        let b = Field::zeros(Grid2D::new(16, 1.0).unwrap());
        assert!(matches!(dealiased_product(&a, &b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn semigroup_checks_inputs() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let u = Field::zeros(g);
        assert!(matches!(semigroup_apply(&u, -1.0, 1.0), Err(Error::NegativeTime(_))));
        assert!(semigroup_apply(&u, 1.0, 2.5).is_err());
    }

    #[test]
    fn semigroup_plane_wave_amplitude() {
        let g = Grid2D::new(16, 2.0 * PI).unwrap();
        let u = Field::from_fn(g, |_, y| (4.0 * y).cos()).unwrap();
        let r = semigroup_apply(&u, 0.5, 1.0).unwrap();
        assert!((r.sup_norm() - (-2.0f64).exp()).abs() < 1e-14);
        let same = semigroup_apply(&u, 0.0, 1.0).unwrap();
        assert!(same.max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn operator_norm_of_rotation_and_shear() {
        assert!((operator_norm(0.0, -1.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
        // [[0, a], [0, 0]] has norm |a|
        assert!((operator_norm(0.0, 3.0, 0.0, 0.0) - 3.0).abs() < 1e-15);
    }
}
