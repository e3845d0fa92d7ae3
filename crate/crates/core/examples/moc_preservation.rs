//! Breach statistic of the scaled modulus along a critical run from a
//! small steep front.

use std::f64::consts::PI;

use sqg_lab::corpus::{generate_member, CorpusKind};
use sqg_lab::moc::{choose_lambda, moc_breach_monitor, BreachSampling, ModulusOfContinuity};
use sqg_lab::solver::{run, EvolutionConfig};
use sqg_lab::Grid2D;

fn main() -> sqg_lab::Result<()> {
    let g = Grid2D::new(128, 2.0 * PI * 8.0)?;
    let front = CorpusKind::SteepFront {
        amplitude: 0.0025,
        width: 1.0,
    };
    let theta0 = generate_member(0, g, &front, 0)?;
    let cfg = EvolutionConfig {
        t_end: 2.0,
        snapshot_every: 20,
        ..EvolutionConfig::default()
    };
    let tr = run(&theta0, &cfg)?;
    let moc = ModulusOfContinuity::new(1e-2, 1e-4)?;
    let lc = choose_lambda(&moc, theta0.sup_norm(), theta0.grad_sup())?;
    println!("lambda = {:.4e}, C0 = {:.4e}", lc.lambda, lc.c0);
    let samples = moc_breach_monitor(
        &tr.times,
        &tr.states,
        &moc,
        lc.lambda,
        lc.c0,
        &BreachSampling::default(),
    )?;
    for s in samples {
        println!("t={:.2}  B={:.4}  at distance {:.3}", s.t, s.b, s.argmax_distance);
    }
    Ok(())
}
