//! Transport-diffusion scenarios: the constant each one needs in the
//! a priori estimate, and the fitted constant over the set.

use sqg_lab::solver::{fit_thm2_constant, run_td, td_scenarios, thm2_measure, EvolutionConfig};
use sqg_lab::Grid2D;

fn main() -> sqg_lab::Result<()> {
    let g = Grid2D::desk();
    let mut ms = Vec::new();
    for s in td_scenarios(g, 8, 0)? {
        let cfg = EvolutionConfig {
            forcing: s.forcing.clone(),
            ..EvolutionConfig::default()
        };
        let tr = run_td(&s.theta0, &s.velocity, &cfg)?;
        let m = thm2_measure(&tr, s.s, s.r, s.rbar)?;
        println!(
            "{:<12} s={:5} r={:<4} rbar={:<4} lhs={:.4e} data={:.4e} V={:.3} C_req={:.4}",
            s.name,
            s.s,
            s.r,
            s.rbar,
            m.lhs,
            m.data,
            m.v,
            m.required_constant()
        );
        ms.push(m);
    }
    println!("fitted C = {:.4}", fit_thm2_constant(&ms));
    Ok(())
}
