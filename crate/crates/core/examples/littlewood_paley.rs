//! Dyadic blocks of a corpus member, its Besov norms in both
//! characterizations, and Bernstein constants on ring-supported data.

use std::f64::consts::PI;

use sqg_lab::corpus::standard_corpus;
use sqg_lab::lp::{bernstein_probe, besov_norm, besov_norm_fd, build_partition, ring_supported, Support};
use sqg_lab::Grid2D;

fn main() -> sqg_lab::Result<()> {
    let g = Grid2D::desk();
    let corpus = standard_corpus(0, g)?;
    let (name, u) = &corpus[9];
    let part = build_partition(g)?;
    let dec = part.decompose(u)?;
    println!("{name}: blocks q = {}..={}", part.q_min(), part.q_max());
    for b in &dec.blocks {
        println!(
            "  q={:2}  |D_q u|_2 = {:.4e}  |D_q u|_inf = {:.4e}",
            b.q, b.norm_l2, b.norm_inf
        );
    }
    let rec = dec.reconstruct().expect("non-empty");
    println!("reconstruction error {:.2e}", rec.max_abs_diff(u));

    for s in [0.3, 0.5, 0.8] {
        let dy = besov_norm(u, s, f64::INFINITY, 1.0)?.value;
        let fd = besov_norm_fd(u, s, f64::INFINITY, 1.0)?.value;
        println!(
            "s={s}: dyadic {dy:.4e}  finite-difference {fd:.4e}  ratio {:.3}",
            fd / dy
        );
    }

    let unit = Grid2D::new(128, 2.0 * PI)?;
    let samples = [4.0, 8.0, 16.0]
        .iter()
        .map(|&l| Ok((Support::Ring { lambda: l }, ring_supported(unit, l)?)))
        .collect::<sqg_lab::Result<Vec<_>>>()?;
    let r = bernstein_probe(&samples, 1, f64::INFINITY, f64::INFINITY)?;
    println!(
        "bernstein ring constants in [{:.3}, {:.3}], pass = {}",
        r.rhs, r.lhs, r.pass
    );
    Ok(())
}
