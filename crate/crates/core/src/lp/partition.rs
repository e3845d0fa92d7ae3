//! Dyadic partition of unity on the Fourier lattice.
//!
//! `χ` equals 1 on `[0, 3/4]` and 0 on `[1, ∞)` with a `C^∞` transition, and
//! `φ(r) = χ(r/2) - χ(r)` is supported in `[3/4, 2]`. The blocks
//! `φ(2^{-q}|ξ|)` telescope, so their sum over a contiguous range is a
//! difference of two `χ` values and equals 1 wherever both ends saturate.

use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{lp_norm_of, Field, Grid2D};

const CHI_FLAT: f64 = 0.75;
const CHI_ZERO: f64 = 1.0;

/// `C^∞` step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, built from `e^{-1/t}`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Low-pass profile.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - CHI_FLAT) / (CHI_ZERO - CHI_FLAT))
}

/// Ring profile, zero outside `[3/4, 2]`.
pub fn phi(r: f64) -> f64 {
    if r <= CHI_FLAT || r >= 2.0 * CHI_ZERO {
        return 0.0;
    }
    chi(r / 2.0) - chi(r)
}

/// Inner and outer radius of the support of `φ(2^{-q}·)`.
pub fn ring_bounds(q: i32) -> (f64, f64) {
    let s = 2f64.powi(q);
    (CHI_FLAT * s, 2.0 * CHI_ZERO * s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DyadicPartition {
    grid: Grid2D,
    q_min: i32,
    q_max: i32,
    /// `φ(2^{-q}|ξ|)` on the lattice, one row per block from `q_min`.
    symbols: Arc<Vec<Vec<f64>>>,
}

/// Smallest block range whose telescoped sum is exactly 1 on every retained
/// non-zero lattice frequency.
pub fn build_partition(grid: Grid2D) -> Result<DyadicPartition> {
    // block q_min must already swallow the lowest frequency: χ(2^{-q_min} k0) = 0
    let q_min = ((grid.k0() / CHI_ZERO).log2() + 1e-9).floor() as i32;
    // and χ(2^{-q_max-1} |k|) = 1 at the corner of the retained square
    let corner = std::f64::consts::SQRT_2 * grid.dealias_cutoff();
    let q_max = (((corner / CHI_FLAT).log2() - 1e-9).ceil() as i32) - 1;
    if q_max - q_min + 1 < 3 {
        return Err(Error::InvalidGrid(format!(
            "{grid} resolves only {} dyadic blocks, need 3",
            q_max - q_min + 1
        )));
    }
    type Tables = Arc<Vec<Vec<f64>>>;
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Tables>>> = OnceLock::new();
    let key = (grid.n(), grid.length().to_bits());
    let cached = CACHE
        .get_or_init(Default::default)
        .lock()
        .expect("partition cache poisoned")
        .get(&key)
        .cloned();
    let mut p = DyadicPartition {
        grid,
        q_min,
        q_max,
        symbols: Arc::new(Vec::new()),
    };
    p.symbols = match cached {
        Some(s) => s,
        None => {
            let s: Arc<Vec<Vec<f64>>> = Arc::new(
                p.q_range()
                    .map(|q| {
                        (0..grid.len())
                            .map(|idx| p.block_symbol(q, grid.wavenumber(idx)))
                            .collect()
                    })
                    .collect(),
            );
            CACHE
                .get()
                .expect("initialized above")
                .lock()
                .expect("partition cache poisoned")
                .insert(key, s.clone());
            s
        }
    };
    Ok(p)
}

impl DyadicPartition {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn q_min(&self) -> i32 {
        self.q_min
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    pub fn q_range(&self) -> RangeInclusive<i32> {
        self.q_min..=self.q_max
    }

    pub fn block_count(&self) -> usize {
        (self.q_max - self.q_min + 1) as usize
    }

    pub fn contains(&self, q: i32) -> bool {
        self.q_range().contains(&q)
    }

    /// `φ(2^{-q}|ξ|)`.
    pub fn block_symbol(&self, q: i32, xi: f64) -> f64 {
        if xi == 0.0 {
            return 0.0;
        }
        phi(xi * 2f64.powi(-q))
    }

    /// `S_q` symbol, `Σ_{q_min ≤ j ≤ q-1} φ_j`, in telescoped form.
    pub fn low_pass_symbol(&self, q: i32, xi: f64) -> f64 {
        if xi == 0.0 || q <= self.q_min {
            return 0.0;
        }
        chi(xi * 2f64.powi(-q)) - chi(xi * 2f64.powi(-self.q_min))
    }

    /// Largest `|Σ_q φ_q(ξ) - 1|` over retained non-zero lattice frequencies.
    pub fn residual(&self) -> f64 {
        (1..self.grid.len())
            .filter(|&idx| self.grid.is_retained(idx))
            .map(|idx| {
                let xi = self.grid.wavenumber(idx);
                let sum: f64 = self.q_range().map(|q| self.block_symbol(q, xi)).sum();
                (sum - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    fn check_block(&self, q: i32) -> Result<()> {
        if self.contains(q) {
            Ok(())
        } else {
            Err(Error::out_of_range(
                "block index q",
                q as f64,
                format!("[{}, {}]", self.q_min, self.q_max),
            ))
        }
    }

    fn apply(&self, u: &Field, symbol: impl Fn(f64) -> f64) -> Field {
        let g = self.grid;
        u.map_spectral(|idx| Complex64::new(symbol(g.wavenumber(idx)), 0.0))
    }

    fn apply_block(&self, u: &Field, q: i32) -> Field {
        let table = &self.symbols[(q - self.q_min) as usize];
        u.map_spectral(|idx| Complex64::new(table[idx], 0.0))
    }

    /// `Δ_q u`.
    pub fn project(&self, u: &Field, q: i32) -> Result<DyadicBlock> {
        self.grid.check_same(u.grid())?;
        self.check_block(q)?;
        Ok(DyadicBlock::new(q, self.apply_block(u, q)))
    }

    /// `S_q u = Σ_{j ≤ q-1} Δ_j u`, defined for `q ≤ q_max + 1`.
    pub fn low_pass(&self, u: &Field, q: i32) -> Result<Field> {
        self.grid.check_same(u.grid())?;
        if q > self.q_max + 1 {
            return Err(Error::out_of_range(
                "low-pass index q",
                q as f64,
                format!("at most {}", self.q_max + 1),
            ));
        }
        Ok(self.apply(u, |xi| self.low_pass_symbol(q, xi)))
    }

    /// All blocks of `u`.
    pub fn decompose(&self, u: &Field) -> Result<Decomposition> {
        self.grid.check_same(u.grid())?;
        let blocks = self
            .q_range()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|q| DyadicBlock::new(q, self.apply_block(u, q)))
            .collect();
        Ok(Decomposition { blocks })
    }
}

/// One Littlewood–Paley piece with its `L²` and `L^∞` norms.
#[derive(Clone, Debug)]
pub struct DyadicBlock {
    pub q: i32,
    pub data: Field,
    pub norm_l2: f64,
    pub norm_inf: f64,
}

impl DyadicBlock {
    fn new(q: i32, data: Field) -> Self {
        let norm_l2 = data.lp_norm(2.0);
        let norm_inf = data.sup_norm();
        Self {
            q,
            data,
            norm_l2,
            norm_inf,
        }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p == 2.0 {
            self.norm_l2
        } else if p.is_infinite() {
            self.norm_inf
        } else {
            lp_norm_of(self.data.physical(), p, self.data.grid().cell_area())
        }
    }
}

/// Every block of one field, computed once and reused for several norms.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub blocks: Vec<DyadicBlock>,
}

impl Decomposition {
    pub fn block(&self, q: i32) -> Option<&DyadicBlock> {
        self.blocks.iter().find(|b| b.q == q)
    }

    /// `Σ_q Δ_q u`.
    pub fn reconstruct(&self) -> Option<Field> {
        let mut it = self.blocks.iter();
        let first = it.next()?.data.clone();
        Some(it.fold(first, |acc, b| acc.add(&b.data).expect("blocks share a grid")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_support_and_values() {
        assert_eq!(phi(0.75), 0.0);
        assert_eq!(phi(2.0), 0.0);
        assert_eq!(phi(0.5), 0.0);
        assert_eq!(phi(3.0), 0.0);
        // |ξ| = 1 lies in exactly one ring
        assert_eq!(phi(1.0), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(1.0), 0.0);
        for i in 1..200 {
            let r = 0.75 + 1.25 * i as f64 / 200.0;
            assert!((0.0..=1.0).contains(&phi(r)));
        }
    }

    #[test]
    fn unit_box_range() {
        let p = build_partition(Grid2D::new(256, 2.0 * PI).unwrap()).unwrap();
        assert_eq!(p.q_range(), 0..=7);
        assert!(p.residual() <= 1e-12);
    }

    #[test]
    fn desk_range() {
        let p = build_partition(Grid2D::desk()).unwrap();
        assert_eq!(p.q_range(), -3..=3);
        assert!(p.residual() <= 1e-12);
    }

    #[test]
    fn tiny_grid_is_rejected() {
        assert!(build_partition(Grid2D::new(8, 2.0 * PI).unwrap()).is_err());
    }

    #[test]
    fn zero_frequency_is_excluded() {
        let p = build_partition(Grid2D::desk()).unwrap();
        for q in p.q_range() {
            assert_eq!(p.block_symbol(q, 0.0), 0.0);
        }
        assert_eq!(p.low_pass_symbol(p.q_max() + 1, 0.0), 0.0);
    }

    #[test]
    fn plane_wave_on_ring_center() {
        // |k| = 2 sits in block 1 only
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let p = build_partition(g).unwrap();
        let u = Field::from_fn(g, |x, _| (2.0 * x).cos()).unwrap();
        let b = p.project(&u, 1).unwrap();
        assert!(b.data.max_abs_diff(&u) < 1e-14);
        assert!(p.project(&u, 0).unwrap().norm_inf < 1e-15);
        assert!(p.project(&u, 2).unwrap().norm_inf < 1e-15);
    }

    #[test]
    fn out_of_range_block_is_rejected() {
        let g = Grid2D::desk();
        let p = build_partition(g).unwrap();
        let u = Field::zeros(g);
        assert!(p.project(&u, 4).is_err());
        assert!(p.project(&u, -4).is_err());
        assert!(p.low_pass(&u, 4).is_ok());
        assert!(p.low_pass(&u, 5).is_err());
    }
}
