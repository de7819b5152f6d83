//! Executes a scenario and assembles the report.

use std::path::Path;
use std::time::Instant;

use cfweave::certify::{
    certify_bessel_sum, certify_closeness_woven, certify_operator_image, certify_removal,
    certify_subset_extension, certify_subspace_intersection, certify_upper_not_optimal,
    Certificate, CertifyConfig, Verdict,
};
use cfweave::frame::FrameBounds;
use cfweave::hilbert::{DiscretizedMeasureSpace, Operator};
use cfweave::perturbation::{
    certify_perturbation, certify_perturbation_chain, default_chain_scalars, default_scalars,
    PerturbationScalars,
};
use cfweave::product::{certify_product_equivalence, lift_product};
use cfweave::{SearchStrategy, UniversalBounds, WovenFamily};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::instance::{spanned, vector, Instance};
use crate::scenario::{CheckEntry, CheckSpec, Scenario, ScalarsSpec};

pub const TOOL_VERSION: &str = concat!("cfweave ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub seed: u64,
    /// The scenario as run: defaults filled in, instance references resolved.
    pub scenario: Scenario,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub index: usize,
    pub kind: String,
    pub expect: Verdict,
    pub as_expected: bool,
    /// Search actually used for the true bounds.
    pub strategy: SearchStrategy,
    pub fallback: bool,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inapplicable: usize,
    pub unexpected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub checks_ms: Vec<f64>,
}

impl Report {
    /// 0 when every verdict matches its expectation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.unexpected == 0 {
            0
        } else {
            1
        }
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let verdict = verdict_name(c.certificate.verdict);
                let mut line = format!("[{}] {}: {verdict}", c.index, c.kind);
                if !c.as_expected {
                    line.push_str(&format!(" (expected {})", verdict_name(c.expect)));
                }
                if let Some(t) = &c.certificate.true_bounds {
                    line.push_str(&format!("; true bounds ({:.6}, {:.6})", t.lower, t.upper));
                }
                if let Some(b) = &c.certificate.claimed {
                    line.push_str(&format!("; claimed ({:.6}, {:.6})", b.lower, b.upper));
                }
                line
            })
            .collect();
        let s = &self.summary;
        out.push(format!(
            "{} pass, {} fail, {} inapplicable, {} unexpected",
            s.pass, s.fail, s.inapplicable, s.unexpected
        ));
        out
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inapplicable => "inapplicable",
    }
}

/// Runs every check in order. `base_dir` anchors relative instance paths.
pub fn run_scenario(scenario: &Scenario, base_dir: &Path) -> Result<Report> {
    let start = Instant::now();
    if scenario.checks.is_empty() {
        return Err(CliError::input("scenario lists no checks"));
    }
    let tol = &scenario.tolerances;
    let resolved = scenario.instance.resolve(base_dir, scenario.seed)?;
    let instance = resolved.load(base_dir, scenario.seed, tol.rank_tol)?;

    let mut echo = scenario.clone();
    echo.instance = resolved;

    let mut checks = Vec::with_capacity(scenario.checks.len());
    let mut checks_ms = Vec::with_capacity(scenario.checks.len());
    let mut summary = Summary::default();
    for (index, entry) in scenario.checks.iter().enumerate() {
        let t0 = Instant::now();
        let primary = scenario.strategy.search(scenario.seed);
        let (certificate, strategy, fallback) =
            match run_check(entry, &instance, &tol.config(primary.clone())) {
                Ok(c) => (c, primary, false),
                Err(CliError::Budget(e)) if scenario.strategy.allow_fallback => {
                    let alt = scenario.strategy.fallback(scenario.seed);
                    let mut c = run_check(entry, &instance, &tol.config(alt.clone()))?;
                    c.notes.push(format!("exhaustive search refused ({e}); fell back to descent"));
                    (c, alt, true)
                }
                Err(e) => return Err(e),
            };
        checks_ms.push(t0.elapsed().as_secs_f64() * 1e3);
        let as_expected = certificate.verdict == entry.expect;
        match certificate.verdict {
            Verdict::Pass => summary.pass += 1,
            Verdict::Fail => summary.fail += 1,
            Verdict::Inapplicable => summary.inapplicable += 1,
        }
        if !as_expected {
            summary.unexpected += 1;
        }
        checks.push(CheckResult {
            index,
            kind: entry.check.name().to_string(),
            expect: entry.expect,
            as_expected,
            strategy,
            fallback,
            certificate,
        });
    }
    Ok(Report {
        tool_version: TOOL_VERSION.to_string(),
        seed: scenario.seed,
        scenario: echo,
        checks,
        summary,
        timings: Timings {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            checks_ms,
        },
    })
}

fn run_check(
    entry: &CheckEntry,
    instance: &Instance,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    if let CheckSpec::ProductEquivalence {
        outer_measure,
        weights,
    } = &entry.check
    {
        // Inner frames may live on different spaces, so no woven family is formed.
        let outer = DiscretizedMeasureSpace::new(outer_measure.clone())?;
        let lifted = lift_product(instance.cframes()?, &outer, weights, cfg.rank_tol)?;
        return Ok(certify_product_equivalence(&lifted, cfg)?);
    }
    let family = instance.family(cfg.rank_tol)?;
    let fam = &family;
    let d = fam.dim();
    let m = fam.member_count();
    let cert = match &entry.check {
        CheckSpec::BesselSum => certify_bessel_sum(fam, cfg)?,
        CheckSpec::OperatorImage { operator, assumed } => {
            if operator.len() != d {
                return Err(CliError::input(format!(
                    "operator_image: operator has {} rows, expected {d}",
                    operator.len()
                )));
            }
            let rows = operator
                .iter()
                .enumerate()
                .map(|(r, row)| vector(d, row, &format!("operator row {r}")))
                .collect::<Result<Vec<_>>>()?;
            let u = Operator::from_fn(d, d, |r, c| rows[r][c]);
            let assumed = assumed.map(|[a, b]| FrameBounds::new(a, b));
            certify_operator_image(fam, &u, assumed, cfg)?
        }
        CheckSpec::Intersection { w } => {
            let w = spanned(d, w, cfg.rank_tol, "intersection W")?;
            certify_subspace_intersection(fam, &w, cfg)?
        }
        CheckSpec::Subset { nodes } => certify_subset_extension(fam, nodes, cfg)?,
        CheckSpec::Removal { nodes, keep, d } => certify_removal(fam, nodes, *keep, *d, cfg)?,
        CheckSpec::Closeness { n } => certify_closeness_woven(fam, *n, cfg)?,
        CheckSpec::UpperNotOptimal => certify_upper_not_optimal(fam, cfg)?,
        CheckSpec::ProductEquivalence { .. } => unreachable!("handled above"),
        CheckSpec::Perturbation { reference, scalars } => {
            let scalars = match scalars {
                ScalarsSpec::Keyword(_) => default_scalars(fam, *reference)?,
                ScalarsSpec::Explicit(terms) => PerturbationScalars {
                    reference: *reference,
                    terms: terms.clone(),
                },
            };
            certify_perturbation(fam, &scalars, cfg)?
        }
        CheckSpec::PerturbationChain { scalars } => {
            let chain = match scalars {
                ScalarsSpec::Keyword(_) => default_chain_scalars(fam)?,
                ScalarsSpec::Explicit(terms) => terms.clone(),
            };
            if chain.len() + 1 != m {
                return Err(CliError::input(format!(
                    "perturbation_chain: expected {} scalar terms, got {}",
                    m - 1,
                    chain.len()
                )));
            }
            certify_perturbation_chain(fam, &chain, cfg)?
        }
    };
    Ok(cert)
}

/// Member fusion bounds and universal bounds of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub members: Vec<FrameBounds>,
    pub universal: UniversalBounds,
}

pub fn family_bounds(fam: &WovenFamily, strategy: &SearchStrategy) -> Result<BoundsSummary> {
    let members = fam.member_bounds()?;
    let universal = fam.universal_bounds(strategy)?;
    Ok(BoundsSummary { members, universal })
}
