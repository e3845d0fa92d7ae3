use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::Composition;
use crate::solver::EvolutionConfig;
use crate::spectral::Grid2D;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid2D> {
        Grid2D::new(self.n, self.length)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        let g = Grid2D::desk();
        Self {
            n: g.n(),
            length: g.length(),
        }
    }
}

/// Serialized shape of [`EvolutionConfig`] (forcing is not configurable from
/// a file).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSpec {
    pub alpha: f64,
    pub kappa: f64,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: crate::solver::Integrator,
    pub cfl: f64,
    pub snapshot_every: usize,
    pub ceiling: f64,
    pub max_halvings: u32,
}

impl From<&EvolutionConfig> for EvolutionSpec {
    fn from(c: &EvolutionConfig) -> Self {
        Self {
            alpha: c.alpha,
            kappa: c.kappa,
            dt: c.dt,
            t_end: c.t_end,
            integrator: c.integrator,
            cfl: c.cfl,
            snapshot_every: c.snapshot_every,
            ceiling: c.ceiling,
            max_halvings: c.max_halvings,
        }
    }
}

impl EvolutionSpec {
    pub fn build(&self) -> EvolutionConfig {
        EvolutionConfig {
            alpha: self.alpha,
            kappa: self.kappa,
            dt: self.dt,
            t_end: self.t_end,
            integrator: self.integrator,
            cfl: self.cfl,
            snapshot_every: self.snapshot_every,
            ceiling: self.ceiling,
            max_halvings: self.max_halvings,
            forcing: None,
        }
    }
}

impl Default for EvolutionSpec {
    fn default() -> Self {
        (&EvolutionConfig::default()).into()
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// One requested verification with its parameters. Omitted parameters take
/// the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuiteEntry {
    /// Plane-wave eigenvalues of the multipliers and `R₁² + R₂² = −Id`.
    Spectral {
        #[serde(default = "tol_12")]
        tol: f64,
    },
    /// `Δ_kΔ_q = 0` for `|k − q| ≥ 2`; `Δ_k(S_{q−1}u Δ_q u) = 0` for `|k − q| ≥ 5`.
    Orthogonality {
        #[serde(default = "tol_12")]
        tol_blocks: f64,
        #[serde(default = "tol_10")]
        tol_products: f64,
    },
    /// Finite-difference against dyadic Besov norms over the corpus, at the
    /// configured grid and at twice its resolution.
    Besov {
        #[serde(default = "besov_s")]
        s: Vec<f64>,
        #[serde(default = "inf")]
        p: f64,
        #[serde(default = "one")]
        m: f64,
        #[serde(default = "ten")]
        bound: f64,
        #[serde(default = "two")]
        stability: f64,
    },
    /// Bernstein constants on ring- and ball-supported data.
    Bernstein {
        #[serde(default = "one_u32")]
        k: u32,
    },
    /// `L^p` norms of unforced critical runs do not grow.
    MaxPrinciple {
        #[serde(default = "max_principle_members")]
        members: Vec<String>,
        #[serde(default = "one")]
        t_end: f64,
        #[serde(default = "tol_8")]
        tol: f64,
    },
    /// Sup-norm decay rate of `e^{−t|D|}` on rings of radius `2^q`.
    Semigroup {
        #[serde(default = "semigroup_qs")]
        qs: Vec<i32>,
        #[serde(default = "rate_factor")]
        rate_factor: f64,
    },
    Picard {
        #[serde(default = "picard_members")]
        members: Vec<String>,
        #[serde(default = "eps0")]
        epsilon0: f64,
        #[serde(default = "eta")]
        eta: f64,
        #[serde(default = "picard_n_max")]
        n_max: usize,
    },
    /// Fitted transport-diffusion constant on `scenarios` and `2·scenarios`
    /// cases, and on `scenarios` cases at twice the resolution.
    Thm2 {
        #[serde(default = "eight")]
        scenarios: usize,
        #[serde(default = "two")]
        stability: f64,
    },
    /// Smoothing constants fitted on the full corpus and on its first half.
    Smoothing {
        #[serde(default = "betas")]
        betas: Vec<f64>,
        #[serde(default = "one")]
        t_end: f64,
        #[serde(default = "two")]
        stability: f64,
    },
    /// `(T* − t)‖∇θ‖_∞` with `T*` the end of a critical run.
    Blowup {
        #[serde(default = "blowup_member")]
        member: String,
        #[serde(default = "one")]
        t_end: f64,
        #[serde(default = "eps0")]
        eps0: f64,
    },
    Commutator {
        #[serde(default = "commutator_s")]
        s: Vec<f64>,
        /// Upper bound accepted for `Σ_q lhs_q / rhs`.
        #[serde(default = "ten")]
        bound: f64,
    },
    Vishik {
        #[serde(default = "flow_member")]
        member: String,
        #[serde(default)]
        q: i32,
        #[serde(default = "three")]
        max_gap: i32,
        #[serde(default = "vishik_times")]
        times: Vec<f64>,
        #[serde(default)]
        method: Composition,
    },
    /// Log-log slopes of the flow commutator in `2^q` and in `V`.
    Flowcomm {
        #[serde(default = "flow_member")]
        member: String,
        #[serde(default = "flow_qs")]
        qs: Vec<i32>,
        #[serde(default = "flow_time")]
        time: f64,
        #[serde(default = "one_i32")]
        q_for_v: i32,
        #[serde(default = "v_range")]
        v_range: [f64; 2],
        #[serde(default = "five")]
        v_points: usize,
        #[serde(default)]
        method: Composition,
        #[serde(default = "q_slope")]
        q_slope: [f64; 2],
        #[serde(default = "v_slope")]
        v_slope: [f64; 2],
    },
    MocCertify {
        #[serde(default = "delta")]
        delta: f64,
        #[serde(default = "gamma")]
        gamma: f64,
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "xi_range")]
        xi_range: [f64; 2],
        #[serde(default = "points")]
        points: usize,
    },
    /// Breach statistic and blow-up proxy on a steep-front critical run.
    MocPreservation {
        #[serde(default = "delta")]
        delta: f64,
        #[serde(default = "gamma")]
        gamma: f64,
        #[serde(default = "front_amplitude")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        /// Multiplies the configured resolution.
        #[serde(default = "two_usize")]
        refine: usize,
        #[serde(default = "two")]
        t_end: f64,
        #[serde(default = "ten_usize")]
        snapshot_every: usize,
        #[serde(default = "eps0")]
        eps0: f64,
    },
    /// Runs every other entry a second time and compares the reports bit
    /// for bit.
    Determinism,
}

fn tol_12() -> f64 {
    1e-12
}
fn tol_10() -> f64 {
    1e-10
}
fn tol_8() -> f64 {
    1e-8
}
fn inf() -> f64 {
    f64::INFINITY
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn ten() -> f64 {
    10.0
}
fn one_u32() -> u32 {
    1
}
fn one_i32() -> i32 {
    1
}
fn three() -> i32 {
    3
}
fn five() -> usize {
    5
}
fn eight() -> usize {
    8
}
fn two_usize() -> usize {
    2
}
fn ten_usize() -> usize {
    10
}
fn besov_s() -> Vec<f64> {
    vec![0.3, 0.5, 0.8]
}
fn max_principle_members() -> Vec<String> {
    names(&[
        "single_mode-0",
        "random_band-0",
        "bump-0",
        "steep_front-0",
        "random_band-1",
    ])
}
fn semigroup_qs() -> Vec<i32> {
    vec![-2, -1, 0, 1]
}
fn rate_factor() -> f64 {
    0.7
}
fn picard_members() -> Vec<String> {
    names(&["random_band-0", "random_band-1", "random_band-2"])
}
fn eps0() -> f64 {
    0.1
}
fn eta() -> f64 {
    0.9
}
fn picard_n_max() -> usize {
    8
}
fn betas() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}
fn blowup_member() -> String {
    "steep_front-0".into()
}
fn commutator_s() -> Vec<f64> {
    vec![-0.5, 0.0, 0.5]
}
fn flow_member() -> String {
    "steep_front-0".into()
}
fn vishik_times() -> Vec<f64> {
    vec![0.5, 2.0]
}
fn flow_qs() -> Vec<i32> {
    vec![-1, 0, 1, 2]
}
fn flow_time() -> f64 {
    0.05
}
fn v_range() -> [f64; 2] {
    [1e-3, 1e-1]
}
fn q_slope() -> [f64; 2] {
    [1.0, 0.2]
}
fn v_slope() -> [f64; 2] {
    [0.5, 0.15]
}
fn delta() -> f64 {
    1e-2
}
fn gamma() -> f64 {
    1e-4
}
fn xi_range() -> [f64; 2] {
    [1e-6, 1e6]
}
fn points() -> usize {
    2000
}
fn front_amplitude() -> f64 {
    0.0025
}

impl SuiteEntry {
    pub const NAMES: &'static [&'static str] = &[
        "spectral",
        "orthogonality",
        "besov",
        "bernstein",
        "max_principle",
        "semigroup",
        "picard",
        "thm2",
        "smoothing",
        "blowup",
        "commutator",
        "vishik",
        "flowcomm",
        "moc_certify",
        "moc_preservation",
        "determinism",
    ];

    /// The entry called `name` with every parameter at its default.
    pub fn default_for(name: &str) -> Result<Self> {
        let text = format!("name = \"{name}\"");
        toml::from_str(&text).map_err(|_| Error::UnknownSuite(name.to_string()))
    }

    pub fn name(&self) -> &'static str {
        match self {
            SuiteEntry::Spectral { .. } => "spectral",
            SuiteEntry::Orthogonality { .. } => "orthogonality",
            SuiteEntry::Besov { .. } => "besov",
            SuiteEntry::Bernstein { .. } => "bernstein",
            SuiteEntry::MaxPrinciple { .. } => "max_principle",
            SuiteEntry::Semigroup { .. } => "semigroup",
            SuiteEntry::Picard { .. } => "picard",
            SuiteEntry::Thm2 { .. } => "thm2",
            SuiteEntry::Smoothing { .. } => "smoothing",
            SuiteEntry::Blowup { .. } => "blowup",
            SuiteEntry::Commutator { .. } => "commutator",
            SuiteEntry::Vishik { .. } => "vishik",
            SuiteEntry::Flowcomm { .. } => "flowcomm",
            SuiteEntry::MocCertify { .. } => "moc_certify",
            SuiteEntry::MocPreservation { .. } => "moc_preservation",
            SuiteEntry::Determinism => "determinism",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub output_dir: String,
    pub grid: GridSpec,
    pub evolution: EvolutionSpec,
    #[serde(default)]
    pub suite: Vec<SuiteEntry>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: "out".into(),
            grid: GridSpec::default(),
            evolution: EvolutionSpec::default(),
            suite: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    /// Every registered verification except determinism, then determinism.
    pub fn default_suite() -> Self {
        let suite = SuiteEntry::NAMES
            .iter()
            .map(|n| SuiteEntry::default_for(n).expect("registered names parse"))
            .collect();
        Self {
            suite,
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config {
            path: e
                .span()
                .map(|s| locate(text, s.start))
                .unwrap_or_else(|| "<document>".into()),
            msg: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |path: &str, e: Error| Error::Config {
            path: path.to_string(),
            msg: e.to_string(),
        };
        self.grid.build().map_err(|e| err("grid", e))?;
        self.evolution.build().validate().map_err(|e| err("evolution", e))?;
        Ok(())
    }
}

/// `line L, column C` of a byte offset.
fn locate(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    format!("line {line}, column {col}")
}
