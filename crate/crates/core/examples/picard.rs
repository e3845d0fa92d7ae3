//! Picard iteration on a random-band member: horizon, Cauchy ratios and the
//! iterate bound.

use sqg_lab::corpus::standard_corpus;
use sqg_lab::solver::{picard_iterate, PicardConfig};
use sqg_lab::Grid2D;

fn main() -> sqg_lab::Result<()> {
    let g = Grid2D::desk();
    let (name, theta0) = standard_corpus(0, g)?.swap_remove(3);
    let pc = PicardConfig::default();
    let r = picard_iterate(&theta0, &pc, 8)?;
    println!(
        "{name}: T = {:.4e}, small-data lhs = {:.4e} (eps0 = {})",
        r.horizon, r.small_data_lhs, pc.epsilon0
    );
    for s in &r.states {
        println!(
            "  n={}  cauchy={:<12} ratio={:<12} bound={:.4e}",
            s.n,
            s.cauchy_norm.map_or("-".into(), |c| format!("{c:.3e}")),
            s.ratio.map_or("-".into(), |c| format!("{c:.3e}")),
            s.iterate_bound
        );
    }
    println!("contraction = {}, converged = {}", r.contraction, r.converged);
    Ok(())
}
