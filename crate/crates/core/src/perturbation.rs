//! Perturbation certificates for woven families.
//!
//! Members' synthesis maps are compared on one common domain: every field
//! `f` is admitted, and member `i` acts by `T_i f = Σ_j w_j v_{i,j} P_{i,j} f_j`.
//! On `𝓛²(X, F_i)` this is the ordinary synthesis operator.

use serde::{Deserialize, Serialize};

use crate::certify::{CertifyConfig, Certificate, TheoremId, Verdict};
use crate::error::{invalid, FrameError, Result};
use crate::frame::FrameBounds;
use crate::hilbert::operator_norm;
use crate::weaving::WovenFamily;

/// Slack in the hypothesis `‖T_a − T_b‖ ≤ η√B_a + γ√B_b + λ`.
pub const HYPOTHESIS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTerm {
    pub lambda: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl PerturbationTerm {
    pub fn lambda_only(lambda: f64) -> Self {
        Self {
            lambda,
            eta: 0.0,
            gamma: 0.0,
        }
    }

    /// `η √B_a + γ √B_b + λ`.
    pub fn allowance(&self, b_a: f64, b_b: f64) -> f64 {
        self.eta * b_a.sqrt() + self.gamma * b_b.sqrt() + self.lambda
    }

    fn validate(&self) -> Result<()> {
        for (name, x) in [("lambda", self.lambda), ("eta", self.eta), ("gamma", self.gamma)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(invalid(format!("{name} must be finite and >= 0, got {x}")));
            }
        }
        Ok(())
    }
}

/// Scalars `(λ_i, η_i, γ_i)` for each member `i ≠ reference`. The entry at
/// `reference` is unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationScalars {
    pub reference: usize,
    pub terms: Vec<PerturbationTerm>,
}

impl PerturbationScalars {
    fn validate(&self, m: usize) -> Result<()> {
        if self.reference >= m {
            return Err(FrameError::IndexOutOfRange {
                index: self.reference,
                len: m,
            });
        }
        if self.terms.len() != m {
            return Err(FrameError::LengthMismatch {
                expected: m,
                actual: self.terms.len(),
            });
        }
        self.terms.iter().try_for_each(PerturbationTerm::validate)
    }
}

/// `‖T_i − T_k‖`, the largest singular value of the difference of synthesis matrices.
pub fn synthesis_distance(fam: &WovenFamily, i: usize, k: usize) -> Result<f64> {
    let ti = fam.member(i)?.synthesis_matrix();
    let tk = fam.member(k)?.synthesis_matrix();
    Ok(operator_norm(&(ti - tk)))
}

/// `λ_i = ‖T_n − T_i‖`, `η_i = γ_i = 0`.
pub fn default_scalars(fam: &WovenFamily, reference: usize) -> Result<PerturbationScalars> {
    fam.member(reference)?;
    let terms = (0..fam.member_count())
        .map(|i| {
            if i == reference {
                Ok(PerturbationTerm::default())
            } else {
                synthesis_distance(fam, reference, i).map(PerturbationTerm::lambda_only)
            }
        })
        .collect::<Result<_>>()?;
    Ok(PerturbationScalars { reference, terms })
}

/// `A_n − Σ_{i ≠ n} (λ_i + η_i √B_n + γ_i √B_i)(√B_n + √B_i)`. May be `≤ 0`.
pub fn perturbation_lower_bound(fam: &WovenFamily, scalars: &PerturbationScalars) -> Result<f64> {
    scalars.validate(fam.member_count())?;
    let bounds = fam.member_bounds()?;
    Ok(lower_from_bounds(&bounds, scalars))
}

fn lower_from_bounds(bounds: &[FrameBounds], scalars: &PerturbationScalars) -> f64 {
    let n = scalars.reference;
    let bn = bounds[n].upper;
    let penalty: f64 = scalars
        .terms
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != n)
        .map(|(i, t)| {
            let bi = bounds[i].upper;
            t.allowance(bn, bi) * (bn.sqrt() + bi.sqrt())
        })
        .sum();
    bounds[n].lower - penalty
}

/// Checks universal bounds `(A, Σ B_i)` when the synthesis maps of all members
/// are within the stated allowance of the reference member.
pub fn certify_perturbation(
    fam: &WovenFamily,
    scalars: &PerturbationScalars,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    scalars.validate(fam.member_count())?;
    let mut cert = new_certificate(TheoremId::Perturbation);
    let bounds = fam.member_bounds()?;
    let n = scalars.reference;
    cert.record("n", n as f64);
    for (i, t) in scalars.terms.iter().enumerate().filter(|(i, _)| *i != n) {
        let dist = synthesis_distance(fam, n, i)?;
        let allowance = t.allowance(bounds[n].upper, bounds[i].upper);
        cert.record(format!("distance[{i}]"), dist);
        cert.record(format!("allowance[{i}]"), allowance);
        if dist > allowance + HYPOTHESIS_TOL {
            return Ok(cert.inapplicable(format!(
                "hypothesis fails for member {i}: ‖T_n − T_i‖ exceeds allowance by {:.3e}",
                dist - allowance
            )));
        }
    }
    let lower = lower_from_bounds(&bounds, scalars);
    settle(cert, &bounds, lower, fam, cfg)
}

/// Default chain scalars: `λ_i = ‖T_i − T_{i+1}‖`.
pub fn default_chain_scalars(fam: &WovenFamily) -> Result<Vec<PerturbationTerm>> {
    (0..fam.member_count() - 1)
        .map(|i| synthesis_distance(fam, i, i + 1).map(PerturbationTerm::lambda_only))
        .collect()
}

/// `A_1 − Σ_{i < m} (λ_i + η_i √B_i + γ_i √B_{i+1})(√B_i + √B_{i+1})`.
pub fn chain_lower_bound(fam: &WovenFamily, chain: &[PerturbationTerm]) -> Result<f64> {
    validate_chain(fam, chain)?;
    let bounds = fam.member_bounds()?;
    Ok(chain_lower_from_bounds(&bounds, chain))
}

fn chain_lower_from_bounds(bounds: &[FrameBounds], chain: &[PerturbationTerm]) -> f64 {
    let penalty: f64 = chain
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (b0, b1) = (bounds[i].upper, bounds[i + 1].upper);
            t.allowance(b0, b1) * (b0.sqrt() + b1.sqrt())
        })
        .sum();
    bounds[0].lower - penalty
}

fn validate_chain(fam: &WovenFamily, chain: &[PerturbationTerm]) -> Result<()> {
    if chain.len() + 1 != fam.member_count() {
        return Err(FrameError::LengthMismatch {
            expected: fam.member_count() - 1,
            actual: chain.len(),
        });
    }
    chain.iter().try_for_each(PerturbationTerm::validate)
}

/// Consecutive members `i, i+1` within their allowance; reference is member 0.
pub fn certify_perturbation_chain(
    fam: &WovenFamily,
    chain: &[PerturbationTerm],
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    validate_chain(fam, chain)?;
    let mut cert = new_certificate(TheoremId::PerturbationChain);
    let bounds = fam.member_bounds()?;
    for (i, t) in chain.iter().enumerate() {
        let dist = synthesis_distance(fam, i, i + 1)?;
        let allowance = t.allowance(bounds[i].upper, bounds[i + 1].upper);
        cert.record(format!("distance[{i},{}]", i + 1), dist);
        cert.record(format!("allowance[{i},{}]", i + 1), allowance);
        if dist > allowance + HYPOTHESIS_TOL {
            return Ok(cert.inapplicable(format!(
                "hypothesis fails for pair ({i}, {}): distance exceeds allowance by {:.3e}",
                i + 1,
                dist - allowance
            )));
        }
    }
    let lower = chain_lower_from_bounds(&bounds, chain);
    settle(cert, &bounds, lower, fam, cfg)
}

fn new_certificate(theorem: TheoremId) -> Certificate {
    Certificate {
        theorem,
        hypotheses: Vec::new(),
        claimed: None,
        true_bounds: None,
        scope: "family".into(),
        verdict: Verdict::Inapplicable,
        notes: Vec::new(),
    }
}

fn settle(
    mut cert: Certificate,
    bounds: &[FrameBounds],
    lower: f64,
    fam: &WovenFamily,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let total: f64 = bounds.iter().map(|b| b.upper).sum();
    cert.record("A", lower);
    cert.record("sum_B", total);
    if lower <= 0.0 {
        return Ok(cert.inapplicable(format!("inconclusive: A = {lower:.6e} is not positive")));
    }
    let actual = fam.universal_bounds(&cfg.strategy)?;
    Ok(cert.judge(FrameBounds::new(lower, total), actual, cfg.bound_tol))
}
