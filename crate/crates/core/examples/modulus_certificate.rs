//! Negativity scan of `Ω ω' + I` for the default modulus, then the largest
//! advective constant the scan tolerates.

use sqg_lab::moc::{certify_negativity, ModulusOfContinuity};

fn main() -> sqg_lab::Result<()> {
    let moc = ModulusOfContinuity::new(1e-2, 1e-4)?;
    let report = certify_negativity(&moc, 1.0, (1e-6, 1e6), 2000)?;
    println!(
        "delta={} gamma={} C={} certified={} margin={:.3e} refinement_margin={:.3e} max_C={:.4}",
        report.delta,
        report.gamma,
        report.c,
        report.certified,
        report.margin,
        report.refinement_margin,
        report.max_certifiable_c
    );
    if !report.offending.is_empty() {
        println!(
            "offending xi: {:?}",
            &report.offending[..report.offending.len().min(10)]
        );
    }
    for i in (0..report.xi_grid.len()).step_by(250) {
        println!(
            "xi={:9.3e}  Omega*omega'={:10.3e}  I={:10.3e}",
            report.xi_grid[i],
            report.omega_big_vals[i] * report.omega_deriv[i],
            report.i_vals[i]
        );
    }
    Ok(())
}
