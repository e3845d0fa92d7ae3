//! Critical run from a bump: norms, Besov diagnostics, the maximum
//! principle and the blow-up proxy.

use sqg_lab::corpus::standard_corpus;
use sqg_lab::solver::{blowup_monitor, max_principle_drift, run, EvolutionConfig};
use sqg_lab::Grid2D;

fn main() -> sqg_lab::Result<()> {
    let g = Grid2D::desk();
    let (name, theta0) = standard_corpus(0, g)?.swap_remove(6);
    let cfg = EvolutionConfig {
        dt: 0.01,
        t_end: 1.0,
        snapshot_every: 10,
        ..EvolutionConfig::default()
    };
    let tr = run(&theta0, &cfg)?;
    println!(
        "{name} to t={} ({} snapshots, {} CFL halvings)",
        tr.t_end(),
        tr.states.len(),
        tr.halvings
    );
    print!("{}", tr.diagnostics_csv());
    let d = max_principle_drift(&tr);
    println!(
        "L^p growth per unit time (p = 2, 4, inf): {:.2e} {:.2e} {:.2e}",
        d[0], d[1], d[2]
    );
    let b = blowup_monitor(&tr, tr.t_end(), 0.1)?;
    println!("blow-up proxy tail minimum {:.3e}, pass = {}", b.lhs, b.pass);
    Ok(())
}
