use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::partition::{build_partition, Decomposition};
use crate::error::{Error, Result};
use crate::quadrature::{Quadrature, QuadratureResult};
use crate::spectral::{lp_norm_of, Field};

/// `ℓ^m` norm of a finite sequence; `m = ∞` is the maximum.
pub fn lm_norm(values: impl IntoIterator<Item = f64>, m: f64) -> f64 {
    if m.is_infinite() {
        values.into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
    } else {
        values.into_iter().map(|v| v.abs().powf(m)).sum::<f64>().powf(1.0 / m)
    }
}

/// Accepts `inf`, `infinity` or a number `≥ 1`.
pub fn parse_exponent(s: &str) -> Result<f64> {
    let v = match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        other => other
            .parse::<f64>()
            .map_err(|_| Error::Format(format!("`{s}` is not an exponent")))?,
    };
    check_exponent("exponent", v)?;
    Ok(v)
}

pub(crate) fn check_exponent(what: &'static str, v: f64) -> Result<()> {
    if v >= 1.0 {
        Ok(())
    } else {
        Err(Error::out_of_range(what, v, "[1, ∞]"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTerm {
    pub q: i32,
    /// `2^{qs} ‖Δ_q u‖_{L^p}`
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub s: f64,
    pub p: f64,
    pub m: f64,
    pub value: f64,
    pub per_block: Vec<BlockTerm>,
}

impl BesovNorm {
    pub fn recompute(&self) -> f64 {
        lm_norm(self.per_block.iter().map(|b| b.value), self.m)
    }
}

impl Decomposition {
    pub fn besov(&self, s: f64, p: f64, m: f64) -> BesovNorm {
        let per_block: Vec<BlockTerm> = self
            .blocks
            .iter()
            .map(|b| BlockTerm {
                q: b.q,
                value: 2f64.powf(b.q as f64 * s) * b.lp_norm(p),
            })
            .collect();
        let value = lm_norm(per_block.iter().map(|b| b.value), m);
        BesovNorm {
            s,
            p,
            m,
            value,
            per_block,
        }
    }
}

/// `‖u‖_{Ḃ^s_{p,m}}` from the dyadic blocks resolvable on `u`'s grid.
pub fn besov_norm(u: &Field, s: f64, p: f64, m: f64) -> Result<BesovNorm> {
    check_exponent("p", p)?;
    check_exponent("m", m)?;
    let partition = build_partition(*u.grid())?;
    Ok(partition.decompose(u)?.besov(s, p, m))
}

/// Radial bins per octave for the finite-difference shift set.
const FD_BINS_PER_OCTAVE: f64 = 8.0;
/// Shifts kept per radial bin, evenly spread in angle.
const FD_SHIFTS_PER_BIN: usize = 64;
const FD_TAYLOR_ANGLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdBesov {
    pub s: f64,
    pub p: f64,
    pub m: f64,
    /// `raw / normalization`, directly comparable with the dyadic norm.
    pub value: f64,
    /// The difference integral itself.
    pub raw: f64,
    /// Ratio of the difference integral to the dyadic norm for a plane wave
    /// with `|k|` at a ring center.
    pub normalization: f64,
    pub shifts: usize,
}

/// Finite-difference form `(∫ ‖u(·-x) - u‖_p^m |x|^{-sm-2} dx)^{1/m}`.
///
/// Lattice shifts with `|x| ≤ L/2` are grouped in logarithmic radial bins;
/// the radial integral is taken in `log r` by the trapezoid rule over the bin
/// means, and `|x| < Δx` is covered by the first-order Taylor expansion of
/// `u`.
pub fn besov_norm_fd(u: &Field, s: f64, p: f64, m: f64) -> Result<FdBesov> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::out_of_range("s", s, "(0, 1)"));
    }
    check_exponent("p", p)?;
    check_exponent("m", m)?;
    let g = *u.grid();
    let n = g.n() as i64;
    let dx = g.dx();
    let area = g.cell_area();
    let half = n / 2;

    let bins = shift_bins(g.n(), FD_BINS_PER_OCTAVE);
    let shifts: Vec<(i64, i64)> = bins.iter().flatten().copied().collect();
    let samples = u.physical();
    let diffs: Vec<f64> = shifts
        .par_iter()
        .map(|&(a, b)| shifted_difference_norm(samples, g.n(), a, b, p, area))
        .collect();

    let (grad1, grad2) = u.gradient();
    let directional: Vec<f64> = (0..FD_TAYLOR_ANGLES)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / FD_TAYLOR_ANGLES as f64;
            let d: Vec<f64> = grad1
                .physical()
                .iter()
                .zip(grad2.physical())
                .map(|(a, b)| t.cos() * a + t.sin() * b)
                .collect();
            lp_norm_of(&d, p, area)
        })
        .collect();

    let raw = if m.is_infinite() {
        let taylor = directional.iter().fold(0.0, |acc: f64, v| acc.max(*v)) * dx.powf(1.0 - s);
        shifts
            .iter()
            .zip(&diffs)
            .map(|(&(a, b), d)| d / (dx * (a as f64).hypot(b as f64)).powf(s))
            .fold(taylor, f64::max)
    } else {
        let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(bins.len());
        let mut offset = 0;
        for bin in &bins {
            let count = bin.len();
            if count == 0 {
                continue;
            }
            let mut log_r = 0.0;
            let mut val = 0.0;
            for (k, &(a, b)) in bin.iter().enumerate() {
                let r = dx * (a as f64).hypot(b as f64);
                log_r += r.ln();
                val += diffs[offset + k].powf(m) * r.powf(-s * m);
            }
            offset += count;
            nodes.push((log_r / count as f64, val / count as f64));
        }
        let mut integral = 0.0;
        for w in nodes.windows(2) {
            integral += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        }
        // extend the last bin mean out to |x| = L/2
        if let Some(&(lr, v)) = nodes.last() {
            integral += v * ((half as f64 * dx).ln() - lr).max(0.0);
        }
        let g_m = directional.iter().map(|v| v.powf(m)).sum::<f64>() / FD_TAYLOR_ANGLES as f64;
        let taylor = g_m * dx.powf(m * (1.0 - s)) / (m * (1.0 - s));
        (2.0 * PI * (integral + taylor)).powf(1.0 / m)
    };
    let normalization = fd_normalization(s, m)?;
    Ok(FdBesov {
        s,
        p,
        m,
        value: raw / normalization,
        raw,
        normalization,
        shifts: shifts.len(),
    })
}

/// Lattice shifts `(a, b)` with `0 < |(a, b)| ≤ n/2`, grouped by radius into
/// bins `[2^{i/B}, 2^{(i+1)/B})` and thinned to at most
/// `FD_SHIFTS_PER_BIN` per bin, evenly in angle.
fn shift_bins(n: usize, per_octave: f64) -> Vec<Vec<(i64, i64)>> {
    let half = (n / 2) as i64;
    let nbins = ((half as f64).log2() * per_octave).floor() as usize + 1;
    let mut bins: Vec<Vec<(i64, i64)>> = vec![Vec::new(); nbins];
    for a in -half..=half {
        for b in -half..=half {
            let r = (a as f64).hypot(b as f64);
            if r == 0.0 || r > half as f64 {
                continue;
            }
            let i = ((r.log2() * per_octave) + 1e-12).floor() as usize;
            bins[i.min(nbins - 1)].push((a, b));
        }
    }
    for bin in &mut bins {
        bin.sort_by(|x, y| {
            let tx = (x.1 as f64).atan2(x.0 as f64);
            let ty = (y.1 as f64).atan2(y.0 as f64);
            tx.total_cmp(&ty).then(x.cmp(y))
        });
        if bin.len() > FD_SHIFTS_PER_BIN {
            let len = bin.len();
            *bin = (0..FD_SHIFTS_PER_BIN)
                .map(|k| bin[k * len / FD_SHIFTS_PER_BIN])
                .collect();
        }
    }
    bins
}

/// `‖u(· - (a, b)Δx) - u‖_{L^p}` by index roll.
fn shifted_difference_norm(samples: &[f64], n: usize, a: i64, b: i64, p: f64, area: f64) -> f64 {
    let ni = n as i64;
    let shift_j = a.rem_euclid(ni) as usize;
    let mut acc = 0.0f64;
    for i in 0..n {
        let si = (i as i64 - b).rem_euclid(ni) as usize;
        let row = &samples[i * n..(i + 1) * n];
        let src = &samples[si * n..(si + 1) * n];
        // src[(j - a) mod n] - row[j], split at the wrap point
        let pairs = src[n - shift_j..]
            .iter()
            .chain(&src[..n - shift_j])
            .zip(row)
            .map(|(x, y)| (x - y).abs());
        acc = if p.is_infinite() {
            pairs.fold(acc, f64::max)
        } else if p == 2.0 {
            pairs.fold(acc, |s, d| s + d * d)
        } else if p == 1.0 {
            pairs.fold(acc, |s, d| s + d)
        } else {
            pairs.fold(acc, |s, d| s + d.powf(p))
        };
    }
    if p.is_infinite() {
        acc
    } else {
        (acc * area).powf(1.0 / p)
    }
}

/// Difference integral of `cos(k·x)` divided by its dyadic norm when `|k|` is
/// a ring center:
///
/// `N^m = ∫_0^{2π} |cos θ|^{sm} dθ · ∫_0^∞ |2 sin(t/2)|^m t^{-sm-1} dt`,
/// and for `m = ∞`, `N = sup_t |2 sin(t/2)| / t^s`. Independent of `p`.
pub fn fd_normalization(s: f64, m: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();
    let key = (s.to_bits(), m.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("normalization cache poisoned").get(&key) {
        return Ok(*v);
    }
    let v = if m.is_infinite() {
        sup_normalization(s)
    } else {
        integral_normalization(s, m)?
    };
    cache.lock().expect("normalization cache poisoned").insert(key, v);
    Ok(v)
}

fn sup_normalization(s: f64) -> f64 {
    // |2 sin(t/2)| t^{-s} peaks in (0, π]: golden-section search on the log
    let f = |t: f64| (2.0 * (t / 2.0).sin()).ln() - s * t.ln();
    let (mut a, mut b) = (1e-6, PI);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b)).exp()
}

fn integral_normalization(s: f64, m: f64) -> Result<f64> {
    let quad = Quadrature::new(1e-13, 1e-10);
    let sm = s * m;
    let angular = quad.integrate(|t: f64| t.cos().powf(sm), 0.0, PI / 2.0);
    let angular = finish(angular, "angular factor")? * 4.0;

    let radial = |t: f64| (2.0 * (t / 2.0).sin()).abs().powf(m) * t.powf(-sm - 1.0);
    const PERIODS: usize = 400;
    let mut points = vec![0.0];
    points.extend((1..=PERIODS).map(|k| 2.0 * PI * k as f64));
    let body = finish(quad.integrate_points(radial, &points), "radial factor")?;
    // beyond T the period mean of |2 sin(t/2)|^m times ∫_T^∞ t^{-sm-1}
    let period_mean = finish(
        quad.integrate(|t: f64| (2.0 * (t / 2.0).sin()).abs().powf(m), 0.0, 2.0 * PI),
        "period mean",
    )? / (2.0 * PI);
    let t_end = 2.0 * PI * PERIODS as f64;
    let tail = period_mean * t_end.powf(-sm) / sm;
    Ok((angular * (body + tail)).powf(1.0 / m))
}

fn finish(r: QuadratureResult, what: &str) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::Quadrature {
            what: what.into(),
            achieved: r.error,
        })
    }
}
