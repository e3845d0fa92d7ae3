//! Flow map of a cellular velocity, the Vishik localization sweep and the
//! scaling of the `|D|` flow commutator in `2^q` and in `V`.

use sqg_lab::corpus::standard_corpus;
use sqg_lab::estimates::{
    flow_commutator_q_sweep, flow_commutator_v_sweep, integrate_flow, vishik_sweep, Composition, FlowOptions,
    VelocitySeries,
};
use sqg_lab::suite::cellular;
use sqg_lab::Grid2D;

fn main() -> sqg_lab::Result<()> {
    let g = Grid2D::desk();
    let (name, f) = standard_corpus(0, g)?.swap_remove(9);
    let v = VelocitySeries::steady(cellular(g, 1.0)?);
    let opts = FlowOptions::default();

    let psi = integrate_flow(&v, 0, 1.0, &opts)?;
    println!(
        "flow to t=1: V = {:.3}, |grad psi| = {:.4}, |grad psi^-1| = {:.4}, det drift = {:.2e}, roundtrip = {:.2e}",
        psi.v_t,
        psi.grad_sup(),
        psi.inverse_grad_sup(),
        psi.jacobian_drift(),
        psi.roundtrip_error()
    );

    let sw = vishik_sweep(&f, &[psi], 0, 3, Composition::Bicubic)?;
    println!("vishik: C = {:.4}, monotone in |j - q| = {}", sw.constant, sw.monotone);

    let (_, qfit) = flow_commutator_q_sweep(&f, &v, 0.05, &[-1, 0, 1, 2], &opts, Composition::Bicubic)?;
    println!("{name}: commutator / |D_q f| against 2^q, slope {:.3}", qfit.slope);
    let ts = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let (ms, vfit) = flow_commutator_v_sweep(&f, &v, 1, &ts, &opts, Composition::Bicubic)?;
    for m in &ms {
        println!("  V = {:.1e}  lhs = {:.4e}", m.v_t, m.lhs);
    }
    println!("commutator against V, slope {:.3}", vfit.slope);
    Ok(())
}
