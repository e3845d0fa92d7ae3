//! Riesz transforms, fractional powers, the semigroup and the integral form
//! of `|D|^{1/2}` on a single plane wave.

use std::f64::consts::PI;

use sqg_lab::spectral::{apply_multiplier, fractional_laplacian_integral, semigroup_apply, velocity_from_theta};
use sqg_lab::{Field, Grid2D, Multiplier};

fn main() -> sqg_lab::Result<()> {
    let g = Grid2D::new(64, 2.0 * PI * 8.0)?;
    let (k1, k2) = (3.0 * g.k0(), 4.0 * g.k0());
    let k = k1.hypot(k2);
    let u = Field::from_fn(g, |x, y| (k1 * x + k2 * y).cos())?;

    let half = apply_multiplier(&u, Multiplier::FracLap(0.5))?;
    println!(
        "|k| = {k:.4}, |D|^(1/2) gain = {:.12} (exact {:.12})",
        half.sup_norm(),
        k.sqrt()
    );

    let decayed = semigroup_apply(&u, 2.0, 1.0)?;
    println!(
        "e^(-2|D|) gain = {:.12} (exact {:.12})",
        decayed.sup_norm(),
        (-2.0 * k).exp()
    );

    let r1 = apply_multiplier(&apply_multiplier(&u, Multiplier::Riesz1)?, Multiplier::Riesz1)?;
    let r2 = apply_multiplier(&apply_multiplier(&u, Multiplier::Riesz2)?, Multiplier::Riesz2)?;
    println!("|(R1^2 + R2^2) u + u|_inf = {:.2e}", r1.add(&r2)?.add(&u)?.sup_norm());

    let v = velocity_from_theta(&u)?;
    println!(
        "velocity: |v|_inf = {:.6}, relative divergence = {:.2e}",
        v.sup_norm(),
        v.relative_divergence()
    );

    let integral = fractional_laplacian_integral(&u, 0.5)?;
    println!(
        "integral |D|^(1/2): max deviation from spectral = {:.3e} (C = {:.6})",
        integral.field.max_abs_diff(&half),
        integral.constant
    );
    Ok(())
}
