//! One function per registered verification. Each returns the reports it
//! produced; the verification passes when every report does.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::SuiteEntry;
use crate::corpus::{generate_member, standard_corpus, CorpusKind};
use crate::error::{Error, Result};
use crate::estimates::{
    commutator_estimate_sweep, commutator_ratio, flow_commutator_q_sweep, flow_commutator_v_sweep, integrate_flow,
    vishik_sweep, CommutatorReport, FlowOptions, VelocitySeries,
};
use crate::lp::{ball_supported, bernstein_probe, besov_norm, besov_norm_fd, build_partition, ring_supported, Support};
use crate::moc::{certify_negativity, choose_lambda, moc_breach_monitor, BreachSampling, ModulusOfContinuity};
use crate::report::VerificationReport;
use crate::solver::{
    blowup_monitor, fit_smoothing_constant, max_principle_report, picard_iterate, run, run_td, smoothing_measure,
    td_scenarios, thm2_measure, EvolutionConfig, PicardConfig,
};
use crate::spectral::{apply_multiplier, dealiased_product, semigroup_apply, Field, Grid2D, Multiplier, VectorField};

/// Shared inputs of every check.
#[derive(Clone, Debug)]
pub struct CheckContext {
    pub grid: Grid2D,
    pub seed: u64,
    pub evolution: EvolutionConfig,
}

impl CheckContext {
    pub fn member(&self, name: &str) -> Result<Field> {
        member_on(self.seed, self.grid, name)
    }

    fn refined(&self, factor: usize) -> Result<Self> {
        Ok(Self {
            grid: self.grid.refined(factor)?,
            ..self.clone()
        })
    }

    fn evolution_to(&self, t_end: f64) -> EvolutionConfig {
        EvolutionConfig {
            t_end,
            ..self.evolution.clone()
        }
    }
}

/// Standard-corpus member by name, e.g. `bump-1`.
pub fn member_on(seed: u64, grid: Grid2D, name: &str) -> Result<Field> {
    standard_corpus(seed, grid)?
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, f)| f)
        .ok_or_else(|| Error::Config {
            path: "member".into(),
            msg: format!("no corpus member `{name}`"),
        })
}

pub fn run_entry(entry: &SuiteEntry, ctx: &CheckContext) -> Result<Vec<VerificationReport>> {
    let reports = match entry {
        SuiteEntry::Spectral { tol } => spectral(ctx, *tol)?,
        SuiteEntry::Orthogonality {
            tol_blocks,
            tol_products,
        } => orthogonality(ctx, *tol_blocks, *tol_products)?,
        SuiteEntry::Besov {
            s,
            p,
            m,
            bound,
            stability,
        } => besov(ctx, s, *p, *m, *bound, *stability)?,
        SuiteEntry::Bernstein { k } => bernstein(ctx, *k)?,
        SuiteEntry::MaxPrinciple { members, t_end, tol } => max_principle(ctx, members, *t_end, *tol)?,
        SuiteEntry::Semigroup { qs, rate_factor } => semigroup(ctx, qs, *rate_factor)?,
        SuiteEntry::Picard {
            members,
            epsilon0,
            eta,
            n_max,
        } => picard(ctx, members, *epsilon0, *eta, *n_max)?,
        SuiteEntry::Thm2 { scenarios, stability } => thm2(ctx, *scenarios, *stability)?,
        SuiteEntry::Smoothing {
            betas,
            t_end,
            stability,
        } => smoothing(ctx, betas, *t_end, *stability)?,
        SuiteEntry::Blowup { member, t_end, eps0 } => {
            let tr = run(&ctx.member(member)?, &ctx.evolution_to(*t_end))?;
            vec![blowup_monitor(&tr, *t_end, *eps0)?.with_seed(ctx.seed)]
        }
        SuiteEntry::Commutator { s, bound } => commutator(ctx, s, *bound)?.0,
        SuiteEntry::Vishik {
            member,
            q,
            max_gap,
            times,
            method,
        } => {
            let f = ctx.member(member)?;
            let v = VelocitySeries::steady(cellular(ctx.grid, 1.0)?);
            let flows = times
                .iter()
                .map(|&t| integrate_flow(&v, *q, t, &FlowOptions::default()))
                .collect::<Result<Vec<_>>>()?;
            let sw = vishik_sweep(&f, &flows, *q, *max_gap, *method)?;
            let mut out = vec![VerificationReport::new(
                "vishik decay",
                "composition-decay",
                &ctx.grid,
                sw.constant,
                sw.constant,
                sw.monotone,
            )
            .with_constant("C", sw.constant)
            .with_detail("max_band_leak", sw.max_band_leak)];
            out.extend(sw.reports);
            out
        }
        SuiteEntry::Flowcomm {
            member,
            qs,
            time,
            q_for_v,
            v_range,
            v_points,
            method,
            q_slope,
            v_slope,
        } => {
            let f = ctx.member(member)?;
            let v = VelocitySeries::steady(cellular(ctx.grid, 1.0)?);
            let opts = FlowOptions::default();
            let (_, qfit) = flow_commutator_q_sweep(&f, &v, *time, qs, &opts, *method)?;
            // ‖∇v‖_∞ = 1, so V(t) = t
            let ts = log_space(v_range[0], v_range[1], *v_points);
            let (ms, vfit) = flow_commutator_v_sweep(&f, &v, *q_for_v, &ts, &opts, *method)?;
            let slope_report = |name: &str, fit: &crate::estimates::ScalingFit, target: [f64; 2]| {
                let dev = (fit.slope - target[0]).abs();
                VerificationReport::new(name, "flow-commutator", &ctx.grid, dev, target[1], dev <= target[1])
                    .with_constant("slope", fit.slope)
                    .with_constant("intercept", fit.intercept)
                    .with_detail("x", &fit.xs)
                    .with_detail("y", &fit.ys)
                    .with_detail("method", method)
            };
            let leak = ms.iter().map(|m| m.band_leak).fold(0.0, f64::max);
            vec![
                slope_report("flow commutator slope in 2^q", &qfit, *q_slope),
                slope_report("flow commutator slope in V", &vfit, *v_slope).with_detail("max_band_leak", leak),
            ]
        }
        SuiteEntry::MocCertify {
            delta,
            gamma,
            c,
            xi_range,
            points,
        } => {
            let moc = ModulusOfContinuity::new(*delta, *gamma)?;
            let r = certify_negativity(&moc, *c, (xi_range[0], xi_range[1]), *points)?;
            // C against the largest C the scan still certifies
            vec![VerificationReport::new(
                "moc negativity",
                "moc-negativity",
                &ctx.grid,
                *c,
                r.max_certifiable_c,
                r.certified,
            )
            .with_constant("max_certifiable_C", r.max_certifiable_c)
            .with_detail("margin", r.margin)
            .with_detail("refinement_margin", r.refinement_margin)
            .with_detail("offending", r.offending.len())
            .with_detail("points", r.xi_grid.len() + r.refinement_points)]
        }
        SuiteEntry::MocPreservation {
            delta,
            gamma,
            amplitude,
            width,
            refine,
            t_end,
            snapshot_every,
            eps0,
        } => moc_preservation(
            ctx,
            *delta,
            *gamma,
            *amplitude,
            *width,
            *refine,
            *t_end,
            *snapshot_every,
            *eps0,
        )?,
        SuiteEntry::Determinism => {
            return Err(Error::Config {
                path: "suite".into(),
                msg: "determinism is evaluated by the suite runner".into(),
            })
        }
    };
    Ok(reports.into_iter().map(|r| r.with_seed(ctx.seed)).collect())
}

fn exponent_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        p.to_string()
    }
}

fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Cellular flow at the box scale, `v = (A sin kx cos ky, −A cos kx sin ky)`
/// with `‖∇v‖_∞ = grad`.
pub fn cellular(grid: Grid2D, grad: f64) -> Result<VectorField> {
    let k = grid.k0();
    let a = grad / k;
    VectorField::new(
        Field::from_fn(grid, |x, y| a * (k * x).sin() * (k * y).cos())?,
        Field::from_fn(grid, |x, y| -a * (k * x).cos() * (k * y).sin())?,
    )
}

fn spectral(ctx: &CheckContext, tol: f64) -> Result<Vec<VerificationReport>> {
    let g = ctx.grid;
    let limit = g.dealias_mode();
    let modes = [(1, 0), (0, 1), (3, -2), (limit / 2, limit / 3), (-limit, limit)];
    let multipliers = [
        Multiplier::Riesz1,
        Multiplier::Riesz2,
        Multiplier::FracLap(-1.0),
        Multiplier::FracLap(0.5),
        Multiplier::FracLap(1.0),
        Multiplier::FracLap(2.0),
        Multiplier::semigroup(0.3, 0.5),
        Multiplier::semigroup(0.3, 1.0),
        Multiplier::semigroup(0.3, 2.0),
    ];
    // eigenvalue read off the output coefficient of a sampled cosine
    let mut worst = 0.0f64;
    for &(m1, m2) in &modes {
        let (k1, k2) = (m1 as f64 * g.k0(), m2 as f64 * g.k0());
        let phase = 0.37;
        let wave = Field::from_fn(g, |x, y| (k1 * x + k2 * y + phase).cos())?;
        let idx = g.index_of_mode(m2) * g.n() + g.index_of_mode(m1);
        for &m in &multipliers {
            let sym = m.symbol(k1, k2);
            let got = apply_multiplier(&wave, m)?.spectral()[idx] / wave.spectral()[idx];
            worst = worst.max((got - sym).norm() / sym.norm());
        }
    }
    let u = ctx.member("random_band-0")?;
    let r1 = apply_multiplier(&apply_multiplier(&u, Multiplier::Riesz1)?, Multiplier::Riesz1)?;
    let r2 = apply_multiplier(&apply_multiplier(&u, Multiplier::Riesz2)?, Multiplier::Riesz2)?;
    let id = r1.add(&r2)?.add(&u)?.sup_norm() / u.sup_norm();
    Ok(vec![
        VerificationReport::new(
            "plane-wave eigenvalues",
            "spectral-exactness",
            &g,
            worst,
            tol,
            worst <= tol,
        )
        .with_detail("modes", modes.len())
        .with_detail("multipliers", multipliers.iter().map(|m| m.name()).collect::<Vec<_>>()),
        VerificationReport::new("R1^2 + R2^2 = -Id", "spectral-exactness", &g, id, tol, id <= tol),
    ])
}

fn orthogonality(ctx: &CheckContext, tol_blocks: f64, tol_products: f64) -> Result<Vec<VerificationReport>> {
    let g = ctx.grid;
    let part = build_partition(g)?;
    let corpus = standard_corpus(ctx.seed, g)?;
    let qs: Vec<i32> = part.q_range().collect();
    let worst = corpus
        .par_iter()
        .map(|(_, u)| -> Result<(f64, f64)> {
            let scale = u.sup_norm();
            let dec = part.decompose(u)?;
            let mut blocks = 0.0f64;
            let mut products = 0.0f64;
            for &q in &qs {
                let bq = &dec.block(q).expect("block in range").data;
                let low = part.low_pass(u, q - 1)?;
                let prod = dealiased_product(&low, bq)?;
                let prod_scale = low.sup_norm() * bq.sup_norm();
                for &k in &qs {
                    let gap = (k - q).abs();
                    if gap >= 2 {
                        blocks = blocks.max(part.project(bq, k)?.norm_inf / scale);
                    }
                    if gap >= 5 && prod_scale > 0.0 {
                        products = products.max(part.project(&prod, k)?.norm_inf / prod_scale);
                    }
                }
            }
            Ok((blocks, products))
        })
        .collect::<Result<Vec<_>>>()?;
    let blocks = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let products = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    Ok(vec![
        VerificationReport::new(
            "block orthogonality",
            "almost-orthogonality",
            &g,
            blocks,
            tol_blocks,
            blocks <= tol_blocks,
        )
        .with_detail("members", corpus.len()),
        VerificationReport::new(
            "product orthogonality",
            "almost-orthogonality",
            &g,
            products,
            tol_products,
            products <= tol_products,
        )
        .with_detail("members", corpus.len()),
    ])
}

/// `fd / dyadic` for every corpus member and `s`, in corpus order.
fn besov_ratios(seed: u64, grid: Grid2D, s: &[f64], p: f64, m: f64) -> Result<Vec<(String, f64, f64)>> {
    let corpus = standard_corpus(seed, grid)?;
    let mut out = Vec::new();
    for (name, u) in &corpus {
        for &si in s {
            let fd = besov_norm_fd(u, si, p, m)?.value;
            let dy = besov_norm(u, si, p, m)?.value;
            out.push((name.clone(), si, fd / dy));
        }
    }
    Ok(out)
}

fn besov(ctx: &CheckContext, s: &[f64], p: f64, m: f64, bound: f64, stability: f64) -> Result<Vec<VerificationReport>> {
    let coarse = besov_ratios(ctx.seed, ctx.grid, s, p, m)?;
    let fine = besov_ratios(ctx.seed, ctx.grid.refined(2)?, s, p, m)?;
    let lo = coarse.iter().chain(&fine).map(|r| r.2).fold(f64::INFINITY, f64::min);
    let hi = coarse.iter().chain(&fine).map(|r| r.2).fold(0.0, f64::max);
    let spread = hi.max(1.0 / lo);
    let drift = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (b.2 / a.2).max(a.2 / b.2))
        .fold(1.0, f64::max);
    let table: Vec<_> = coarse.iter().zip(&fine).map(|(a, b)| (&a.0, a.1, a.2, b.2)).collect();
    Ok(vec![
        VerificationReport::new(
            "besov fd/dyadic ratio",
            "besov-equivalence",
            &ctx.grid,
            spread,
            bound,
            spread <= bound,
        )
        .with_constant("min_ratio", lo)
        .with_constant("max_ratio", hi)
        .with_detail("p", exponent_label(p))
        .with_detail("m", exponent_label(m))
        .with_detail("ratios", &table),
        VerificationReport::new(
            "besov ratio under refinement",
            "besov-equivalence",
            &ctx.grid,
            drift,
            stability,
            drift <= stability,
        ),
    ])
}

fn bernstein(ctx: &CheckContext, k: u32) -> Result<Vec<VerificationReport>> {
    // unit box so that λ ∈ {4, 8, …} sits on integer modes
    let g = Grid2D::new(ctx.grid.n(), 2.0 * PI)?;
    let lambdas: Vec<f64> = (2..=5)
        .map(|e| 2f64.powi(e))
        .filter(|l| 2.0 * l <= g.dealias_cutoff())
        .collect();
    let rings = lambdas
        .iter()
        .map(|&l| Ok((Support::Ring { lambda: l }, ring_supported(g, l)?)))
        .collect::<Result<Vec<_>>>()?;
    let balls = lambdas
        .iter()
        .map(|&l| Ok((Support::Ball { lambda: l }, ball_supported(g, l)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        bernstein_probe(&rings, k, f64::INFINITY, f64::INFINITY)?,
        bernstein_probe(&balls, k, 2.0, f64::INFINITY)?,
    ])
}

fn max_principle(ctx: &CheckContext, members: &[String], t_end: f64, tol: f64) -> Result<Vec<VerificationReport>> {
    members
        .iter()
        .map(|name| {
            let tr = run(&ctx.member(name)?, &ctx.evolution_to(t_end))?;
            let r = max_principle_report(&tr, tol);
            Ok(VerificationReport {
                name: format!("maximum principle {name}"),
                ..r
            })
        })
        .collect()
}

fn semigroup(ctx: &CheckContext, qs: &[i32], rate_factor: f64) -> Result<Vec<VerificationReport>> {
    let g = ctx.grid;
    qs.iter()
        .map(|&q| {
            let lambda = 2f64.powi(q);
            let u = ring_supported(g, lambda)?;
            // ten samples over about three e-foldings of the slowest mode
            let dt = 0.4 / lambda;
            let ts: Vec<f64> = (0..=10).map(|i| i as f64 * dt).collect();
            let ys = ts
                .iter()
                .map(|&t| Ok(semigroup_apply(&u, t, 1.0)?.sup_norm().ln()))
                .collect::<Result<Vec<f64>>>()?;
            let rate = -least_squares_slope(&ts, &ys);
            let floor = rate_factor * lambda;
            Ok(VerificationReport::new(
                format!("semigroup decay q={q}"),
                "semigroup-decay",
                &g,
                floor,
                rate,
                rate >= floor,
            )
            .with_constant("rate_over_lambda", rate / lambda))
        })
        .collect()
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn picard(
    ctx: &CheckContext,
    members: &[String],
    eps0: f64,
    eta: f64,
    n_max: usize,
) -> Result<Vec<VerificationReport>> {
    let pc = PicardConfig {
        epsilon0: eps0,
        eta,
        ..PicardConfig::default()
    };
    members
        .iter()
        .map(|name| {
            let r = picard_iterate(&ctx.member(name)?, &pc, n_max)?;
            let bound = r.states.iter().map(|s| s.iterate_bound).fold(0.0, f64::max);
            let ratios: Vec<f64> = r.states.iter().filter_map(|s| s.ratio).collect();
            let worst = ratios.iter().copied().fold(0.0, f64::max);
            let pass = r.contraction && r.small_data_lhs <= eps0 && bound <= 2.0 * eps0;
            Ok(VerificationReport::new(
                format!("picard {name}"),
                "picard-contraction",
                &ctx.grid,
                worst,
                eta,
                pass,
            )
            .with_constant("horizon", r.horizon)
            .with_detail("small_data_lhs", r.small_data_lhs)
            .with_detail("iterate_bound", bound)
            .with_detail("consecutive", r.consecutive)
            .with_detail("ratios", &ratios))
        })
        .collect()
}

/// Required constants of the first `count` transport-diffusion scenarios.
fn thm2_constants(ctx: &CheckContext, count: usize) -> Result<Vec<f64>> {
    td_scenarios(ctx.grid, count, ctx.seed)?
        .into_iter()
        .map(|s| {
            let cfg = match s.forcing {
                Some(f) => ctx.evolution.clone().with_forcing(f),
                None => ctx.evolution.clone(),
            };
            let tr = run_td(&s.theta0, &s.velocity, &cfg)?;
            Ok(thm2_measure(&tr, s.s, s.r, s.rbar)?.required_constant())
        })
        .collect()
}

fn thm2(ctx: &CheckContext, count: usize, stability: f64) -> Result<Vec<VerificationReport>> {
    let base = thm2_constants(ctx, 2 * count)?;
    let fine = thm2_constants(&ctx.refined(2)?, count)?;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let (c_small, c_large, c_fine) = (max(&base[..count]), max(&base), max(&fine));
    let spread = |a: f64, b: f64| (a / b).max(b / a);
    let suite = spread(c_small, c_large);
    let res = spread(c_small, c_fine);
    Ok(vec![
        VerificationReport::new(
            "thm2 constant vs suite size",
            "transport-diffusion-estimate",
            &ctx.grid,
            suite,
            stability,
            suite <= stability,
        )
        .with_constant(&format!("C_{count}"), c_small)
        .with_constant(&format!("C_{}", 2 * count), c_large),
        VerificationReport::new(
            "thm2 constant vs resolution",
            "transport-diffusion-estimate",
            &ctx.grid,
            res,
            stability,
            res <= stability,
        )
        .with_constant(&format!("C_n{}", ctx.grid.n()), c_small)
        .with_constant(&format!("C_n{}", 2 * ctx.grid.n()), c_fine),
    ])
}

fn smoothing(ctx: &CheckContext, betas: &[f64], t_end: f64, stability: f64) -> Result<Vec<VerificationReport>> {
    let corpus = standard_corpus(ctx.seed, ctx.grid)?;
    let cfg = ctx.evolution_to(t_end);
    let trajs = corpus.iter().map(|(_, u)| run(u, &cfg)).collect::<Result<Vec<_>>>()?;
    betas
        .iter()
        .map(|&beta| {
            let ms = trajs
                .iter()
                .map(|t| smoothing_measure(t, beta))
                .collect::<Result<Vec<_>>>()?;
            let half: Vec<_> = ms.iter().step_by(2).copied().collect();
            let (full_c, half_c) = (fit_smoothing_constant(&ms), fit_smoothing_constant(&half));
            let spread = if full_c == 0.0 && half_c == 0.0 {
                1.0
            } else {
                (full_c / half_c).max(half_c / full_c)
            };
            let finite = ms.iter().all(|m| m.lhs.is_finite());
            let mut pass = finite && spread <= stability;
            let mut r = VerificationReport::new(
                format!("smoothing beta={beta}"),
                "smoothing-effect",
                &ctx.grid,
                spread,
                stability,
                false,
            )
            .with_constant("C_beta_full", full_c)
            .with_constant("C_beta_half", half_c);
            if beta == 0.0 {
                // sup_t ‖θ(t)‖_{Ḃ⁰} against ‖θ‖_{L̃^∞Ḃ⁰}, with no constant
                let excess = ms.iter().map(|m| m.lhs / m.tilde0).fold(0.0, f64::max);
                pass &= excess <= 1.0 + 1e-12;
                r = r.with_detail("max_lhs_over_tilde0", excess);
            }
            r.pass = pass;
            Ok(r)
        })
        .collect()
}

/// Reports plus the raw per-block sweeps, one per `s`.
pub fn commutator(
    ctx: &CheckContext,
    s: &[f64],
    bound: f64,
) -> Result<(Vec<VerificationReport>, Vec<Vec<CommutatorReport>>)> {
    let theta = ctx.member("random_band-0")?;
    let v = cellular(ctx.grid, 1.0)?;
    let mut reports = Vec::new();
    let mut sweeps = Vec::new();
    for &si in s {
        let sweep = commutator_estimate_sweep(&v, &theta, si)?;
        let total = commutator_ratio(&sweep);
        reports.push(
            VerificationReport::new(
                format!("commutator s={si}"),
                "commutator-estimate",
                &ctx.grid,
                total,
                bound,
                total <= bound,
            )
            .with_constant("C", total),
        );
        sweeps.push(sweep);
    }
    Ok((reports, sweeps))
}

#[allow(clippy::too_many_arguments)]
fn moc_preservation(
    ctx: &CheckContext,
    delta: f64,
    gamma: f64,
    amplitude: f64,
    width: f64,
    refine: usize,
    t_end: f64,
    snapshot_every: usize,
    eps0: f64,
) -> Result<Vec<VerificationReport>> {
    let g = ctx.grid.refined(refine)?;
    let theta0 = generate_member(ctx.seed, g, &CorpusKind::SteepFront { amplitude, width }, 0)?;
    let cfg = EvolutionConfig {
        snapshot_every,
        ..ctx.evolution_to(t_end)
    };
    let tr = run(&theta0, &cfg)?;
    let moc = ModulusOfContinuity::new(delta, gamma)?;
    // T₁ = 0: the data are smooth from the start
    let lc = choose_lambda(&moc, theta0.sup_norm(), theta0.grad_sup())?;
    let sampling = BreachSampling {
        seed: ctx.seed,
        ..BreachSampling::default()
    };
    let samples = moc_breach_monitor(&tr.times, &tr.states, &moc, lc.lambda, lc.c0, &sampling)?;
    let worst = samples.iter().map(|s| s.b).fold(0.0, f64::max);
    let b_series: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.b)).collect();
    Ok(vec![
        VerificationReport::new("moc preservation", "moc-preservation", &g, worst, 1.0, worst < 1.0)
            .with_constant("lambda", lc.lambda)
            .with_constant("C0", lc.c0)
            .with_detail("B", &b_series),
        blowup_monitor(&tr, t_end, eps0)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CheckContext {
        CheckContext {
            grid: Grid2D::new(64, 2.0 * PI * 8.0).unwrap(),
            seed: 1,
            evolution: EvolutionConfig::default(),
        }
    }

    #[test]
    fn unknown_member_is_a_config_error() {
        assert!(matches!(small().member("nope-0"), Err(Error::Config { .. })));
        assert!(small().member("bump-2").is_ok());
    }

    #[test]
    fn cellular_flow_has_requested_gradient() {
        let v = cellular(small().grid, 0.5).unwrap();
        assert!((v.grad_sup() - 0.5).abs() < 1e-12);
        assert!(v.relative_divergence() < 1e-12);
    }

    #[test]
    fn cheap_checks_pass_on_small_grid() {
        let ctx = small();
        for name in ["spectral", "orthogonality", "semigroup", "moc_certify"] {
            let rs = run_entry(&SuiteEntry::default_for(name).unwrap(), &ctx).unwrap();
            assert!(!rs.is_empty());
            assert!(rs.iter().all(|r| r.pass), "{name}: {rs:?}");
        }
    }

    #[test]
    fn slope_of_a_line() {
        assert!((least_squares_slope(&[0.0, 1.0, 2.0], &[1.0, -1.0, -3.0]) + 2.0).abs() < 1e-14);
    }
}
