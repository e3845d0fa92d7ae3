//! Verification reports and the registry of estimates they refer to.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::spectral::Grid2D;

/// A checked estimate: stable identifier plus the inequality in words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Anchor {
    pub id: &'static str,
    pub statement: &'static str,
}

pub const ANCHORS: &[Anchor] = &[
    Anchor {
        id: "spectral-exactness",
        statement: "Riesz, |D|^s and e^{-t|D|^a} act on plane waves by their symbols; R1^2 + R2^2 = -Id",
    },
    Anchor {
        id: "fractional-laplacian-integral",
        statement: "|D|^{1/2} u(x) = C ∫ (u(x) - u(y)) / |x - y|^{5/2} dy",
    },
    Anchor {
        id: "semigroup-decay",
        statement: "‖e^{-t|D|} u‖_∞ ≤ C e^{-c t λ} ‖u‖_∞ for u supported in a ring of size λ",
    },
    Anchor {
        id: "almost-orthogonality",
        statement: "Δ_k Δ_q = 0 for |k - q| ≥ 2; Δ_k(S_{q-1}u Δ_q u) = 0 for |k - q| ≥ 5",
    },
    Anchor {
        id: "besov-equivalence",
        statement: "(∫ ‖u(·-x) - u‖_p^m |x|^{-sm-2} dx)^{1/m} ≈ ‖u‖_{B^s_{p,m}} for 0 < s < 1",
    },
    Anchor {
        id: "bernstein",
        statement: "band-limited functions: derivatives cost λ^k, Lebesgue exponents cost λ^{2(1/p-1/q)}",
    },
    Anchor {
        id: "mixed-norm-embedding",
        statement: "L^r B ⊂ L̃^r B if m ≥ r; L̃^r B ⊂ L^r B if r ≥ m",
    },
    Anchor {
        id: "maximum-principle",
        statement: "‖θ(t)‖_{L^p} ≤ ‖θ(0)‖_{L^p} for the unforced dissipative equation",
    },
    Anchor {
        id: "picard-contraction",
        statement: "iterates contract in L̃^∞ B^0_{∞,1} and stay below 2ε0 under the small-data condition",
    },
    Anchor {
        id: "transport-diffusion-estimate",
        statement: "‖θ‖_{L̃^r B^{s+1/r}_{∞,1}} ≤ C e^{C V(t)} (‖θ0‖_{B^s_{∞,1}} + ‖f‖_{L̃^{r̄} B^{s-1+1/r̄}_{∞,1}})",
    },
    Anchor {
        id: "smoothing-effect",
        statement: "sup_t t^β ‖θ(t)‖_{B^β_{∞,1}} ≤ C_β e^{C(β+1)‖θ‖_{L^1 B^1}} ‖θ‖_{L̃^∞ B^0_{∞,1}}",
    },
    Anchor {
        id: "blowup-criterion",
        statement: "finite T* forces (T* - t)‖∇θ(t)‖_∞ to stay above an absolute constant",
    },
    Anchor {
        id: "commutator-estimate",
        statement: "Σ_q 2^{qs} ‖[Δ_q, v·∇]u‖_∞ ≤ C ‖∇v‖_∞ ‖u‖_{B^s_{∞,1}} for -1 < s < 1",
    },
    Anchor {
        id: "flow-map-bounds",
        statement: "e^{-CV} ≤ ‖∇ψ^{±1}‖_∞ ≤ e^{CV}, det ∇ψ = 1, ‖∇²ψ_q‖_∞ ≤ C e^{CV} 2^q",
    },
    Anchor {
        id: "composition-decay",
        statement: "‖Δ_j(Δ_q f ∘ ψ)‖_p ≤ C 2^{-|j-q|} ‖∇ψ^{±1}‖_∞ ‖Δ_q f‖_p for measure-preserving ψ",
    },
    Anchor {
        id: "flow-commutator",
        statement: "‖|D|(Δ_q f ∘ ψ_q) - (|D|Δ_q f) ∘ ψ_q‖_∞ ≤ C e^{CV} V^{1/2} 2^q ‖Δ_q f‖_∞",
    },
    Anchor {
        id: "moc-negativity",
        statement: "Ω(ξ) ω'(ξ) + I(ξ) < 0 for every ξ > 0",
    },
    Anchor {
        id: "moc-preservation",
        statement: "|θ(t,x) - θ(t,y)| < ω_λ(|x - y|) persists once it holds",
    },
    Anchor {
        id: "determinism",
        statement: "identical configuration and seed give bit-identical reports",
    },
];

pub fn anchor(id: &str) -> Option<&'static Anchor> {
    ANCHORS.iter().find(|a| a.id == id)
}

pub fn is_registered(id: &str) -> bool {
    anchor(id).is_some()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n: usize,
    pub length: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Fitted constants, kept so suite-growth stability can be audited.
    pub constants: BTreeMap<String, f64>,
    pub details: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    /// Identifier from [`ANCHORS`].
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub metadata: ReportMetadata,
}

impl VerificationReport {
    /// Panics if `anchor` is not registered: every check must name a known
    /// estimate.
    pub fn new(name: impl Into<String>, anchor_id: &str, grid: &Grid2D, lhs: f64, rhs: f64, pass: bool) -> Self {
        assert!(is_registered(anchor_id), "unregistered anchor `{anchor_id}`");
        Self {
            name: name.into(),
            anchor: anchor_id.to_string(),
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            pass,
            metadata: ReportMetadata {
                n: grid.n(),
                length: grid.length(),
                ..ReportMetadata::default()
            },
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.metadata.seed = Some(seed);
        self
    }

    pub fn with_constant(mut self, key: &str, value: f64) -> Self {
        self.metadata.constants.insert(key.to_string(), value);
        self
    }

    pub fn with_detail(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.metadata.details.insert(key.to_string(), v);
        self
    }
}

/// `lhs / rhs` with `0 / 0 = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Smallest `C ≥ 0` with `C e^{CV} ≥ target`, for `target ≥ 0` and `V ≥ 0`.
pub fn exp_constant(target: f64, v: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let f = |c: f64| c.ln() + c * v - target.ln();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    // f is increasing; bisect in ln C until the bracket is relatively tight
    lo = lo.max(hi * 1e-300);
    for _ in 0..4000 {
        let mid = if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Fixed-width summary, one line per report.
pub fn summary_table(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<34} {:<30} {:>12} {:>12} {:>12}  result",
        "name", "anchor", "lhs", "rhs", "ratio"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<34} {:<30} {:>12.4e} {:>12.4e} {:>12.4e}  {}",
            r.name,
            r.anchor,
            r.lhs,
            r.rhs,
            r.ratio,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    let _ = writeln!(out, "{passed}/{} passed", reports.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_are_unique() {
        let ids: std::collections::BTreeSet<_> = ANCHORS.iter().map(|a| a.id).collect();
        assert_eq!(ids.len(), ANCHORS.len());
    }

    #[test]
    #[should_panic(expected = "unregistered anchor")]
    fn unknown_anchor_panics() {
        VerificationReport::new("x", "no-such-estimate", &Grid2D::desk(), 1.0, 1.0, true);
    }

    #[test]
    fn json_roundtrip() {
        let r = VerificationReport::new("max", "maximum-principle", &Grid2D::desk(), 0.5, 1.0, true)
            .with_seed(7)
            .with_constant("C", 1.25)
            .with_detail("drift", vec![0.0, 1e-9]);
        assert_eq!(r.ratio, 0.5);
        let s = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn table_counts_passes() {
        let g = Grid2D::desk();
        let rs = vec![
            VerificationReport::new("a", "determinism", &g, 0.0, 0.0, true),
            VerificationReport::new("b", "determinism", &g, 1.0, 0.0, false),
        ];
        let t = summary_table(&rs);
        assert!(t.contains("1/2 passed"));
        assert!(t.contains("FAIL"));
    }
}
