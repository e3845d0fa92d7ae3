//! Seeded synthetic initial data.
//!
//! Every generator is defined in physical units and draws its random numbers
//! in an order that does not depend on `n`, so the same seed produces the
//! same function on any grid that resolves it. Random bands are the one
//! exception up to a scalar per block: their sup normalization is measured
//! on the sample lattice.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid2D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusKind {
    /// `a cos(k·x + φ)` with integer mode `(m1, m2)` and a seeded phase.
    SingleMode { m1: i64, m2: i64, amplitude: f64 },
    /// Random coefficients in the annuli `2^q ≤ |k| ≤ 1.5·2^q`, where block
    /// `q` alone is active, each block rescaled to sup norm
    /// `amplitude · 2^{-slope·q}`.
    RandomBand {
        q_lo: i32,
        q_hi: i32,
        amplitude: f64,
        slope: f64,
    },
    /// Gaussian of width `sigma·(1 + U)` at a random center, mean removed.
    Bump { sigma: f64, amplitude: f64 },
    /// `a tanh(x'/w)` across a randomly oriented line through a random
    /// center, under a Gaussian envelope of radius `L/6`; odd, so mean-free.
    SteepFront { amplitude: f64, width: f64 },
}

impl CorpusKind {
    pub fn name(&self) -> &'static str {
        match self {
            CorpusKind::SingleMode { .. } => "single_mode",
            CorpusKind::RandomBand { .. } => "random_band",
            CorpusKind::Bump { .. } => "bump",
            CorpusKind::SteepFront { .. } => "steep_front",
        }
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `count` members of one kind; member `i` uses stream `i` of `seed`.
pub fn generate_corpus(seed: u64, grid: Grid2D, kind: &CorpusKind, count: usize) -> Result<Vec<Field>> {
    (0..count as u64)
        .map(|i| generate_member(seed, grid, kind, i))
        .collect()
}

pub fn generate_member(seed: u64, grid: Grid2D, kind: &CorpusKind, index: u64) -> Result<Field> {
    let mut rng = rng_for(seed, index);
    match *kind {
        CorpusKind::SingleMode { m1, m2, amplitude } => single_mode(grid, m1, m2, amplitude, &mut rng),
        CorpusKind::RandomBand {
            q_lo,
            q_hi,
            amplitude,
            slope,
        } => random_band(grid, q_lo, q_hi, amplitude, slope, &mut rng),
        CorpusKind::Bump { sigma, amplitude } => bump(grid, sigma, amplitude, &mut rng),
        CorpusKind::SteepFront { amplitude, width } => steep_front(grid, amplitude, width, &mut rng),
    }
}

fn single_mode(grid: Grid2D, m1: i64, m2: i64, amplitude: f64, rng: &mut ChaCha8Rng) -> Result<Field> {
    let limit = grid.dealias_mode();
    if (m1, m2) == (0, 0) || m1.abs() > limit || m2.abs() > limit {
        return Err(Error::out_of_range(
            "single-mode index",
            m1.abs().max(m2.abs()) as f64,
            format!("non-zero, at most {limit} per axis"),
        ));
    }
    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    let c = Complex64::from_polar(0.5 * amplitude, phase);
    spec[grid.index_of_mode(m2) * grid.n() + grid.index_of_mode(m1)] = c;
    spec[grid.index_of_mode(-m2) * grid.n() + grid.index_of_mode(-m1)] = c.conj();
    Field::from_spectral(grid, spec)
}

fn random_band(grid: Grid2D, q_lo: i32, q_hi: i32, amplitude: f64, slope: f64, rng: &mut ChaCha8Rng) -> Result<Field> {
    if q_lo > q_hi {
        return Err(Error::out_of_range(
            "q_hi",
            q_hi as f64,
            format!("at least q_lo = {q_lo}"),
        ));
    }
    let k0 = grid.k0();
    let limit = grid.dealias_mode();
    let mut total = Field::zeros(grid);
    for q in q_lo..=q_hi {
        let (lo, hi) = (2f64.powi(q), 1.5 * 2f64.powi(q));
        let reach = (hi / k0).floor() as i64;
        let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut any = false;
        // canonical half-plane order, independent of n
        for m2 in 0..=reach {
            for m1 in -reach..=reach {
                if m2 == 0 && m1 <= 0 {
                    continue;
                }
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let k = k0 * (m1 as f64).hypot(m2 as f64);
                if k < lo || k > hi || m1.abs() > limit || m2 > limit {
                    continue;
                }
                let c = Complex64::new(re, im);
                spec[grid.index_of_mode(m2) * grid.n() + grid.index_of_mode(m1)] = c;
                spec[grid.index_of_mode(-m2) * grid.n() + grid.index_of_mode(-m1)] = c.conj();
                any = true;
            }
        }
        if !any {
            return Err(Error::SupportViolation(format!(
                "no retained lattice mode in the annulus of block {q} on {grid}"
            )));
        }
        let block = Field::from_spectral(grid, spec)?;
        let target = amplitude * 2f64.powf(-slope * q as f64);
        total = total.add(&block.scale(target / block.sup_norm()))?;
    }
    Ok(total)
}

fn bump(grid: Grid2D, sigma: f64, amplitude: f64, rng: &mut ChaCha8Rng) -> Result<Field> {
    let l = grid.length();
    let c1 = rng.random::<f64>() * l;
    let c2 = rng.random::<f64>() * l;
    let s = sigma * (1.0 + rng.random::<f64>());
    let f = Field::from_fn(grid, |x, y| {
        let d2 = grid.periodic_distance((x, y), (c1, c2)).powi(2);
        amplitude * (-d2 / (2.0 * s * s)).exp()
    })?;
    Ok(f.without_mean().dealiased())
}

fn steep_front(grid: Grid2D, amplitude: f64, width: f64, rng: &mut ChaCha8Rng) -> Result<Field> {
    let l = grid.length();
    let c1 = rng.random::<f64>() * l;
    let c2 = rng.random::<f64>() * l;
    let angle = rng.random::<f64>() * std::f64::consts::TAU;
    let (ca, sa) = (angle.cos(), angle.sin());
    let envelope = l / 6.0;
    let f = Field::from_fn(grid, |x, y| {
        let d1 = wrap(x - c1, l);
        let d2 = wrap(y - c2, l);
        let across = ca * d1 + sa * d2;
        let r2 = d1 * d1 + d2 * d2;
        amplitude * (across / width).tanh() * (-r2 / (2.0 * envelope * envelope)).exp()
    })?;
    Ok(f.without_mean().dealiased())
}

fn wrap(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

/// The twelve-member mixed corpus: three members of each kind, scaled for
/// the default box.
pub fn standard_corpus(seed: u64, grid: Grid2D) -> Result<Vec<(String, Field)>> {
    let kinds = standard_kinds(grid);
    let mut out = Vec::with_capacity(12);
    for (k, kind) in kinds.iter().enumerate() {
        for i in 0..3u64 {
            let f = generate_member(seed, grid, kind, 3 * k as u64 + i)?;
            out.push((format!("{}-{i}", kind.name()), f));
        }
    }
    Ok(out)
}

pub fn standard_kinds(grid: Grid2D) -> Vec<CorpusKind> {
    let k0 = grid.k0();
    // a mode near |k| = 1 in physical units
    let m = (1.0 / k0).round().max(1.0) as i64;
    vec![
        CorpusKind::SingleMode {
            m1: m,
            m2: m / 2,
            amplitude: 1.0,
        },
        CorpusKind::RandomBand {
            q_lo: -2,
            q_hi: 1,
            amplitude: 0.25,
            slope: 0.0,
        },
        CorpusKind::Bump {
            sigma: 1.5,
            amplitude: 1.0,
        },
        CorpusKind::SteepFront {
            amplitude: 1.0,
            width: 1.0,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::build_partition;

    #[test]
    fn same_seed_is_bit_identical() {
        let g = Grid2D::new(64, 2.0 * std::f64::consts::PI * 4.0).unwrap();
        for kind in standard_kinds(g) {
            let a = generate_corpus(11, g, &kind, 2).unwrap();
            let b = generate_corpus(11, g, &kind, 2).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(x
                    .physical()
                    .iter()
                    .zip(y.physical())
                    .all(|(p, q)| p.to_bits() == q.to_bits()));
                assert!(x.is_mean_free());
            }
        }
    }

    #[test]
    fn single_mode_has_one_pair() {
        let g = Grid2D::new(32, 1.0).unwrap();
        let f = generate_member(
            3,
            g,
            &CorpusKind::SingleMode {
                m1: 2,
                m2: -3,
                amplitude: 1.0,
            },
            0,
        )
        .unwrap();
        let nonzero = f.spectral().iter().filter(|c| c.norm() > 1e-15).count();
        assert_eq!(nonzero, 2);
        assert!((f.sup_norm() - 1.0).abs() < 0.05);
    }

    #[test]
    fn flat_band_hits_block_targets() {
        let g = Grid2D::desk();
        let kind = CorpusKind::RandomBand {
            q_lo: -3,
            q_hi: 2,
            amplitude: 0.5,
            slope: 0.0,
        };
        let f = generate_member(5, g, &kind, 0).unwrap();
        let d = build_partition(g).unwrap().decompose(&f).unwrap();
        for q in -3..=2 {
            let sup = d.block(q).unwrap().norm_inf;
            assert!((0.25..=1.0).contains(&sup), "block {q}: {sup}");
        }
    }

    #[test]
    fn resolution_independent() {
        let l = 2.0 * std::f64::consts::PI * 4.0;
        let coarse = Grid2D::new(64, l).unwrap();
        let fine = Grid2D::new(128, l).unwrap();
        let kind = CorpusKind::RandomBand {
            q_lo: -1,
            q_hi: 0,
            amplitude: 1.0,
            slope: 0.0,
        };
        let a = generate_member(9, coarse, &kind, 1).unwrap().upsample(2).unwrap();
        let b = generate_member(9, fine, &kind, 1).unwrap();
        assert!(a.max_abs_diff(&b) < 0.05 * b.sup_norm());
        let bump = CorpusKind::Bump {
            sigma: 1.5,
            amplitude: 1.0,
        };
        let a = generate_member(9, coarse, &bump, 0).unwrap();
        let b = generate_member(9, fine, &bump, 0).unwrap();
        let (pa, pb) = (a.physical(), b.physical());
        for i in 0..64 {
            for j in 0..64 {
                assert!((pa[i * 64 + j] - pb[2 * i * 128 + 2 * j]).abs() < 1e-6);
            }
        }
    }
}
