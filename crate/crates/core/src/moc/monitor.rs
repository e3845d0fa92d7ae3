use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::omega::ModulusOfContinuity;
use crate::error::{Error, Result};
use crate::spectral::Field;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreachSampling {
    /// Short-range pairs reach `C₀/λ`, capped at this many cells.
    pub max_radius_cells: usize,
    /// Budget of short-range pairs per snapshot; sets the base-point stride.
    pub short_pair_budget: usize,
    pub long_range_pairs: usize,
    pub seed: u64,
}

impl Default for BreachSampling {
    fn default() -> Self {
        Self {
            max_radius_cells: 32,
            short_pair_budget: 4_000_000,
            long_range_pairs: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreachSample {
    pub t: f64,
    /// `max |θ(x) − θ(y)| / ω_λ(|x − y|)` over the sampled pairs.
    pub b: f64,
    /// Distance of the maximizing pair.
    pub argmax_distance: f64,
    pub pairs: usize,
}

/// Offsets in the upper half plane with `0 < |(a, b)| ≤ radius`.
fn offsets(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for b in 0..=r {
        for a in -r..=r {
            if (b == 0 && a <= 0) || a * a + b * b > r * r {
                continue;
            }
            out.push((a, b));
        }
    }
    out
}

/// Breach statistic per snapshot: every pair within `C₀/λ` on a strided
/// base sublattice plus a fixed set of seeded long-range pairs. `B < 1` at
/// every time means no sampled pair violates `ω_λ`.
pub fn moc_breach_monitor(
    times: &[f64],
    states: &[Field],
    moc: &ModulusOfContinuity,
    lambda: f64,
    c0: f64,
    sampling: &BreachSampling,
) -> Result<Vec<BreachSample>> {
    if times.len() != states.len() {
        return Err(Error::EmptyTrajectory);
    }
    let Some(first) = states.first() else {
        return Ok(Vec::new());
    };
    if !(lambda > 0.0 && c0 > 0.0) {
        return Err(Error::out_of_range("lambda", lambda, "(0, ∞) with C₀ > 0"));
    }
    let g = *first.grid();
    for s in states {
        g.check_same(s.grid())?;
    }
    let n = g.n();
    let dx = g.dx();
    let w = moc.scaled(lambda);

    let reach = ((c0 / lambda) / dx).ceil().max(1.0) as usize;
    let radius = reach.min(sampling.max_radius_cells).min(n / 2);
    let offs: Vec<((isize, isize), f64)> = offsets(radius)
        .into_iter()
        .map(|(a, b)| {
            let d = dx * ((a * a + b * b) as f64).sqrt();
            ((a, b), w.eval(d))
        })
        .collect();
    let per_base = offs.len().max(1);
    let mut stride = 1;
    while (n / stride) * (n / stride) * per_base > sampling.short_pair_budget && stride < n {
        stride += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let long: Vec<(usize, usize, f64)> = (0..sampling.long_range_pairs)
        .filter_map(|_| {
            let p = rng.random_range(0..n * n);
            let q = rng.random_range(0..n * n);
            let d = g.periodic_distance(g.point(p), g.point(q));
            (d > 0.0).then(|| (p, q, w.eval(d)))
        })
        .collect();

    states
        .par_iter()
        .zip(times)
        .map(|(u, &t)| {
            let v = u.physical();
            let mut best = (0.0f64, 0.0f64);
            let mut pairs = 0usize;
            for i in (0..n).step_by(stride) {
                for j in (0..n).step_by(stride) {
                    let a = v[i * n + j];
                    for &((da, db), om) in &offs {
                        let ii = (i as isize + db).rem_euclid(n as isize) as usize;
                        let jj = (j as isize + da).rem_euclid(n as isize) as usize;
                        let r = (a - v[ii * n + jj]).abs() / om;
                        if r > best.0 {
                            best = (r, dx * ((da * da + db * db) as f64).sqrt());
                        }
                        pairs += 1;
                    }
                }
            }
            for &(p, q, om) in &long {
                let r = (v[p] - v[q]).abs() / om;
                if r > best.0 {
                    best = (r, g.periodic_distance(g.point(p), g.point(q)));
                }
            }
            pairs += long.len();
            Ok(BreachSample {
                t,
                b: best.0,
                argmax_distance: best.1,
                pairs,
            })
        })
        .collect()
}
