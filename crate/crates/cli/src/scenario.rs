//! Scenario files: an instance, a list of checks, search settings and tolerances.

use std::path::{Path, PathBuf};

use cfweave::certify::{CertifyConfig, Verdict};
use cfweave::hilbert::DEFAULT_ENUMERATION_BUDGET;
use cfweave::perturbation::PerturbationTerm;
use cfweave::SearchStrategy;
use serde::{Deserialize, Serialize};

use crate::complex::CNum;
use crate::error::{CliError, Result};
use crate::instance::InstanceSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub strategy: StrategySpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub checks: Vec<CheckEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    Exhaustive,
    Sampled,
    Descent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySpec {
    pub mode: SearchMode,
    pub budget: u64,
    pub samples: usize,
    pub restarts: usize,
    /// Use descent search when the exhaustive budget is exceeded instead of failing.
    pub allow_fallback: bool,
}

impl Default for StrategySpec {
    fn default() -> Self {
        Self {
            mode: SearchMode::Exhaustive,
            budget: DEFAULT_ENUMERATION_BUDGET,
            samples: 4096,
            restarts: 16,
            allow_fallback: false,
        }
    }
}

impl StrategySpec {
    pub fn search(&self, seed: u64) -> SearchStrategy {
        match self.mode {
            SearchMode::Exhaustive => SearchStrategy::Exhaustive {
                budget: self.budget,
            },
            SearchMode::Sampled => SearchStrategy::Sampled {
                samples: self.samples,
                seed,
            },
            SearchMode::Descent => self.fallback(seed),
        }
    }

    pub fn fallback(&self, seed: u64) -> SearchStrategy {
        SearchStrategy::Descent {
            restarts: self.restarts,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub bound_tol: f64,
    pub rank_tol: f64,
    pub commute_tol: f64,
    pub frame_tol: f64,
    pub gap_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = CertifyConfig::default();
        Self {
            bound_tol: c.bound_tol,
            rank_tol: c.rank_tol,
            commute_tol: c.commute_tol,
            frame_tol: c.frame_tol,
            gap_margin: c.gap_margin,
        }
    }
}

impl Tolerances {
    pub fn config(&self, strategy: SearchStrategy) -> CertifyConfig {
        CertifyConfig {
            strategy,
            bound_tol: self.bound_tol,
            rank_tol: self.rank_tol,
            commute_tol: self.commute_tol,
            frame_tol: self.frame_tol,
            gap_margin: self.gap_margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    #[serde(flatten)]
    pub check: CheckSpec,
    /// Verdict this check should produce; defaults to `pass`.
    #[serde(default = "expect_pass")]
    pub expect: Verdict,
}

fn expect_pass() -> Verdict {
    Verdict::Pass
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefaultKeyword {
    Default,
}

/// `"default"` or explicit `(λ, η, γ)` per member (or per consecutive pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarsSpec {
    Keyword(DefaultKeyword),
    Explicit(Vec<PerturbationTerm>),
}

impl Default for ScalarsSpec {
    fn default() -> Self {
        Self::Keyword(DefaultKeyword::Default)
    }
}

/// Node and member indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckSpec {
    BesselSum,
    OperatorImage {
        /// Row-major `d × d` matrix.
        operator: Vec<Vec<CNum>>,
        /// Universal bounds `[A, B]` assumed for the family; computed when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        assumed: Option<[f64; 2]>,
    },
    Intersection {
        /// Spanning vectors of `W`.
        w: Vec<Vec<CNum>>,
    },
    Subset {
        nodes: Vec<usize>,
    },
    Removal {
        nodes: Vec<usize>,
        keep: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<f64>,
    },
    Closeness {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<f64>,
    },
    UpperNotOptimal,
    ProductEquivalence {
        outer_measure: Vec<f64>,
        /// `weights[i][x]` for member `i` at outer node `x`.
        weights: Vec<Vec<f64>>,
    },
    Perturbation {
        #[serde(default)]
        reference: usize,
        #[serde(default)]
        scalars: ScalarsSpec,
    },
    PerturbationChain {
        #[serde(default)]
        scalars: ScalarsSpec,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BesselSum => "bessel_sum",
            Self::OperatorImage { .. } => "operator_image",
            Self::Intersection { .. } => "intersection",
            Self::Subset { .. } => "subset",
            Self::Removal { .. } => "removal",
            Self::Closeness { .. } => "closeness",
            Self::UpperNotOptimal => "upper_not_optimal",
            Self::ProductEquivalence { .. } => "product_equivalence",
            Self::Perturbation { .. } => "perturbation",
            Self::PerturbationChain { .. } => "perturbation_chain",
        }
    }
}

impl Scenario {
    /// Reads TOML, or JSON when the extension is `.json` (as echoed in reports).
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        let scenario: Self = parsed.map_err(|message| CliError::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        if scenario.checks.is_empty() {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                message: "scenario lists no checks".into(),
            });
        }
        Ok(scenario)
    }
}
