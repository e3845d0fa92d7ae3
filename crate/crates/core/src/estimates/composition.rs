//! Compositions `g∘ψ` with a flow map: the Vishik localization probe and
//! the `|D|` flow commutator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{integrate_flow, FlowMap, FlowOptions, VelocitySeries};
use super::interp::{Bicubic, TrigSum};
use crate::error::{Error, Result};
use crate::lp::build_partition;
use crate::report::{exp_constant, VerificationReport};
use crate::spectral::{apply_multiplier, Field, Multiplier};

/// Share of composed energy beyond the 2/3 cutoff above which a
/// composition is flagged as leaving the resolvable band.
pub const BAND_LEAK_WARNING: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Composition {
    /// Bicubic Hermite interpolation with spectral nodal derivatives.
    #[default]
    Bicubic,
    /// Exact trigonometric sum at every displaced point.
    Spectral,
}

#[derive(Clone, Debug)]
pub struct Composed {
    /// `g∘ψ` re-projected under the 2/3 cutoff.
    pub field: Field,
    /// Energy fraction removed by the re-projection.
    pub band_leak: f64,
}

impl Composed {
    pub fn leaves_band(&self) -> bool {
        self.band_leak > BAND_LEAK_WARNING
    }
}

/// `g∘ψ` sampled at the grid, then truncated to the retained band.
pub fn compose(g: &Field, psi: &FlowMap, method: Composition) -> Result<Composed> {
    g.grid().check_same(&psi.grid)?;
    let grid = psi.grid;
    let samples: Vec<f64> = match method {
        Composition::Bicubic => {
            let b = Bicubic::from_field(g);
            (0..grid.len())
                .into_par_iter()
                .map(|idx| {
                    let (x, y) = psi.image(idx);
                    b.jet(x, y).v
                })
                .collect()
        }
        Composition::Spectral => {
            let t = TrigSum::new(g);
            (0..grid.len())
                .into_par_iter()
                .map(|idx| {
                    let (x, y) = psi.image(idx);
                    t.eval(x, y)
                })
                .collect()
        }
    };
    let raw = Field::from_physical(grid, samples)?;
    Ok(Composed {
        band_leak: raw.energy_above_cutoff(),
        field: raw.dealiased(),
    })
}

/// `‖Δ_j(Δ_q f∘ψ)‖_p` against `2^{−|j−q|}‖∇ψ^{sign(j−q)}‖_∞‖Δ_q f‖_p`.
pub fn vishik_probe(
    f: &Field,
    psi: &FlowMap,
    j: i32,
    q: i32,
    p: f64,
    method: Composition,
) -> Result<VerificationReport> {
    if !(p == 2.0 || p == f64::INFINITY) {
        return Err(Error::out_of_range("p", p, "2 or ∞"));
    }
    let partition = build_partition(*f.grid())?;
    let fq = partition.project(f, q)?.data;
    let composed = compose(&fq, psi, method)?;
    let lhs = partition.project(&composed.field, j)?.data.lp_norm(p);
    let gap = (j - q).abs();
    let grad = psi.grad_sup_signed(j - q);
    let rhs = 2f64.powi(-gap) * grad * fq.lp_norm(p);
    Ok(VerificationReport::new(
        format!("vishik j={j} q={q} p={p}"),
        "composition-decay",
        f.grid(),
        lhs,
        rhs,
        lhs.is_finite(),
    )
    .with_detail("gap", gap)
    .with_detail("grad_psi", grad)
    .with_detail("band_leak", composed.band_leak)
    .with_detail("band_warning", composed.leaves_band()))
}

#[derive(Clone, Debug)]
pub struct VishikSweep {
    pub reports: Vec<VerificationReport>,
    /// Largest ratio over the sweep: the fitted constant.
    pub constant: f64,
    /// For every flow and `p`, the worst ratio at gap `d` does not exceed the
    /// worst ratio at gap `d − 1`.
    pub monotone: bool,
    pub max_band_leak: f64,
}

/// Probes `j ∈ [q − max_gap, q + max_gap]` (inside the block range) for every
/// flow and `p ∈ {2, ∞}`.
pub fn vishik_sweep(f: &Field, flows: &[FlowMap], q: i32, max_gap: i32, method: Composition) -> Result<VishikSweep> {
    let partition = build_partition(*f.grid())?;
    let mut reports = Vec::new();
    let mut monotone = true;
    for psi in flows {
        for p in [2.0, f64::INFINITY] {
            let mut worst = vec![0.0f64; max_gap as usize + 1];
            for j in (q - max_gap)..=(q + max_gap) {
                if !partition.contains(j) {
                    continue;
                }
                let r = vishik_probe(f, psi, j, q, p, method)?;
                let d = (j - q).unsigned_abs() as usize;
                worst[d] = worst[d].max(r.ratio);
                reports.push(r);
            }
            monotone &= worst.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
        }
    }
    let constant = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let max_band_leak = reports
        .iter()
        .filter_map(|r| r.metadata.details.get("band_leak").and_then(|v| v.as_f64()))
        .fold(0.0, f64::max);
    Ok(VishikSweep {
        reports,
        constant,
        monotone,
        max_band_leak,
    })
}

/// Measured sides of `‖|D|(Δ_q f∘ψ_q) − (|D|Δ_q f)∘ψ_q‖_∞ ≤ C e^{CV} V^{1/2} 2^q ‖Δ_q f‖_∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowCommutator {
    pub q: i32,
    pub v_t: f64,
    pub lhs: f64,
    /// `‖Δ_q f‖_∞`
    pub block_sup: f64,
    pub band_leak: f64,
}

impl FlowCommutator {
    /// `lhs / (V^{1/2} 2^q ‖Δ_q f‖_∞)`
    pub fn normalized(&self) -> f64 {
        crate::report::ratio(self.lhs, self.v_t.sqrt() * 2f64.powi(self.q) * self.block_sup)
    }

    pub fn rhs(&self, c: f64) -> f64 {
        c * (c * self.v_t).exp() * self.v_t.sqrt() * 2f64.powi(self.q) * self.block_sup
    }

    /// Smallest `C` making this measurement hold.
    pub fn required_constant(&self) -> f64 {
        exp_constant(self.normalized(), self.v_t)
    }
}

pub fn flow_commutator(f: &Field, psi_q: &FlowMap, q: i32, method: Composition) -> Result<FlowCommutator> {
    if psi_q.q != q {
        return Err(Error::out_of_range(
            "flow block index",
            psi_q.q as f64,
            format!("the probed block {q}"),
        ));
    }
    let partition = build_partition(*f.grid())?;
    let fq = partition.project(f, q)?.data;
    let inner = compose(&fq, psi_q, method)?;
    let d_inner = apply_multiplier(&inner.field, Multiplier::FracLap(1.0))?;
    let outer = compose(&apply_multiplier(&fq, Multiplier::FracLap(1.0))?, psi_q, method)?;
    Ok(FlowCommutator {
        q,
        v_t: psi_q.v_t,
        lhs: d_inner.sub(&outer.field)?.sup_norm(),
        block_sup: fq.sup_norm(),
        band_leak: inner.band_leak.max(outer.band_leak),
    })
}

pub fn flow_commutator_report(m: &FlowCommutator, f: &Field, c: f64) -> VerificationReport {
    let rhs = m.rhs(c);
    VerificationReport::new(
        format!("flow commutator q={}", m.q),
        "flow-commutator",
        f.grid(),
        m.lhs,
        rhs,
        m.lhs <= rhs * (1.0 + 1e-12),
    )
    .with_constant("C", c)
    .with_detail("V", m.v_t)
    .with_detail("normalized", m.normalized())
    .with_detail("band_leak", m.band_leak)
    .with_detail("band_warning", m.band_leak > BAND_LEAK_WARNING)
}

pub fn fit_flow_commutator_constant(ms: &[FlowCommutator]) -> f64 {
    ms.iter().map(FlowCommutator::required_constant).fold(0.0, f64::max)
}

/// Least-squares slope of `log y` against `log x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() < 2 || xs.len() != ys.len() || xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::out_of_range(
            "scaling data",
            xs.len() as f64,
            "at least two positive pairs",
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        slope,
        intercept: my - slope * mx,
    })
}

/// One flow per block, all to time `t`; fits `lhs/‖Δ_q f‖_∞` against `2^q`.
pub fn flow_commutator_q_sweep(
    f: &Field,
    v: &VelocitySeries,
    t: f64,
    qs: &[i32],
    opts: &FlowOptions,
    method: Composition,
) -> Result<(Vec<FlowCommutator>, ScalingFit)> {
    let ms = qs
        .iter()
        .map(|&q| flow_commutator(f, &integrate_flow(v, q, t, opts)?, q, method))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = ms.iter().map(|m| 2f64.powi(m.q)).collect();
    let ys: Vec<f64> = ms.iter().map(|m| m.lhs / m.block_sup).collect();
    let fit = fit_loglog(&xs, &ys)?;
    Ok((ms, fit))
}

/// One block, flows to each time in `ts`; fits `lhs` against `V(t)`.
pub fn flow_commutator_v_sweep(
    f: &Field,
    v: &VelocitySeries,
    q: i32,
    ts: &[f64],
    opts: &FlowOptions,
    method: Composition,
) -> Result<(Vec<FlowCommutator>, ScalingFit)> {
    let ms = ts
        .iter()
        .map(|&t| flow_commutator(f, &integrate_flow(v, q, t, opts)?, q, method))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = ms.iter().map(|m| m.v_t).collect();
    let ys: Vec<f64> = ms.iter().map(|m| m.lhs).collect();
    let fit = fit_loglog(&xs, &ys)?;
    Ok((ms, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid2D, VectorField};
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(64, 2.0 * PI * 8.0).unwrap()
    }

    fn sample(g: Grid2D) -> Field {
        Field::from_fn(g, |x, y| {
            (x / 2.0 + y / 4.0).sin() + 0.5 * (x - y / 2.0).cos() + 0.3 * (2.0 * y).sin()
        })
        .unwrap()
    }

    #[test]
    fn identity_flow() {
        let g = grid();
        let f = sample(g);
        let id = FlowMap::identity(g, 0);
        for method in [Composition::Bicubic, Composition::Spectral] {
            let c = compose(&f, &id, method).unwrap();
            assert!(c.field.max_abs_diff(&f.dealiased()) < 1e-12);
            let m = flow_commutator(&f, &id, 0, method).unwrap();
            assert!(m.lhs < 1e-12);
            let far = vishik_probe(&f, &id, 2, 0, f64::INFINITY, method).unwrap();
            assert!(far.lhs < 1e-12);
            let same = vishik_probe(&f, &id, 0, 0, 2.0, method).unwrap();
            assert!(same.ratio <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn spectral_composition_matches_translation() {
        let g = grid();
        let f = sample(g);
        let v = VectorField::new(Field::constant(g, 0.3), Field::constant(g, -0.2)).unwrap();
        let psi = integrate_flow(&VelocitySeries::steady(v), 1, 1.0, &FlowOptions::default()).unwrap();
        let c = compose(&f, &psi, Composition::Spectral).unwrap();
        let exact = f.translate((-0.3, 0.2));
        assert!(c.field.max_abs_diff(&exact) < 1e-10);
    }

    #[test]
    fn loglog_recovers_power() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.7)).collect();
        assert!((fit_loglog(&xs, &ys).unwrap().slope - 0.7).abs() < 1e-12);
    }
}
