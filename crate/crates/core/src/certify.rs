//! Certificates: each certifier computes a theorem's hypothesis constants,
//! evaluates its claimed bounds, and compares them with universal bounds found
//! by partition search.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{CFusionFrame, FrameBounds};
use crate::hilbert::{
    extreme_eigs, image_subspace, intersect_subspaces, operator_norm, pseudo_inverse,
    range_subspace, Operator, Subspace, DEFAULT_RANK_TOL,
};
use crate::weaving::{SearchStrategy, UniversalBounds, WovenFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    BesselSum,
    OperatorImage,
    SubspaceIntersection,
    SubsetExtension,
    Removal,
    ClosenessWoven,
    UpperNotOptimal,
    ProductEquivalence,
    Perturbation,
    PerturbationChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

/// Serializes non-finite reals as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a real: {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    #[serde(with = "real")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub theorem: TheoremId,
    pub hypotheses: Vec<NamedValue>,
    pub claimed: Option<FrameBounds>,
    pub true_bounds: Option<UniversalBounds>,
    /// Which family and subspace `true_bounds` were computed on.
    pub scope: String,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl Certificate {
    fn new(theorem: TheoremId, scope: impl Into<String>) -> Self {
        Self {
            theorem,
            hypotheses: Vec::new(),
            claimed: None,
            true_bounds: None,
            scope: scope.into(),
            verdict: Verdict::Inapplicable,
            notes: Vec::new(),
        }
    }

    pub fn hypothesis(&self, name: &str) -> Option<f64> {
        self.hypotheses
            .iter()
            .find(|h| h.name == name)
            .map(|h| h.value)
    }

    pub(crate) fn record(&mut self, name: impl Into<String>, value: f64) {
        self.hypotheses.push(NamedValue {
            name: name.into(),
            value,
        });
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub(crate) fn inapplicable(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::Inapplicable;
        self.note(why);
        self
    }

    /// Settles the verdict from `claimed` against `actual`.
    pub(crate) fn judge(mut self, claimed: FrameBounds, actual: UniversalBounds, tol: f64) -> Self {
        let ok = claimed.brackets(&actual.bounds(), tol);
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        if !ok {
            if claimed.lower > actual.lower + tol {
                self.note(format!(
                    "claimed lower {:.12e} exceeds true lower {:.12e}",
                    claimed.lower, actual.lower
                ));
            }
            if claimed.upper < actual.upper - tol {
                self.note(format!(
                    "claimed upper {:.12e} is below true upper {:.12e}",
                    claimed.upper, actual.upper
                ));
            }
        }
        if !actual.certified {
            self.note("true bounds come from a non-exhaustive search and are not certified");
        }
        self.claimed = Some(claimed);
        self.true_bounds = Some(actual);
        self
    }
}

/// Tolerances and search mode shared by all certifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    pub strategy: SearchStrategy,
    /// Slack allowed when comparing claimed and true bounds.
    pub bound_tol: f64,
    pub rank_tol: f64,
    /// Largest `‖P_F P_W − P_W P_F‖` that counts as commuting.
    pub commute_tol: f64,
    /// A lower bound at or below this is treated as "not a frame".
    pub frame_tol: f64,
    /// Relative margin demanded of the non-optimality gap.
    pub gap_margin: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            strategy: SearchStrategy::default(),
            bound_tol: 1e-8,
            rank_tol: DEFAULT_RANK_TOL,
            commute_tol: 1e-8,
            frame_tol: 1e-9,
            gap_margin: 1e-6,
        }
    }
}

fn sum_upper(bounds: &[FrameBounds]) -> f64 {
    bounds.iter().map(|b| b.upper).sum()
}

fn record_member_bounds(cert: &mut Certificate, bounds: &[FrameBounds]) {
    for (i, b) in bounds.iter().enumerate() {
        cert.record(format!("A[{i}]"), b.lower);
        cert.record(format!("B[{i}]"), b.upper);
    }
}

/// Every weaving is Bessel with bound `Σ_i B_i`.
pub fn certify_bessel_sum(fam: &WovenFamily, cfg: &CertifyConfig) -> Result<Certificate> {
    let mut cert = Certificate::new(TheoremId::BesselSum, "family");
    let bounds = fam.member_bounds()?;
    record_member_bounds(&mut cert, &bounds);
    let total = sum_upper(&bounds);
    cert.record("sum_B", total);
    let actual = fam.universal_bounds(&cfg.strategy)?;
    Ok(cert.judge(FrameBounds::new(0.0, total), actual, cfg.bound_tol))
}

/// Image of a woven family under `U`, on `range(U)`, against
/// `(A ‖U†‖⁻² ‖U‖⁻², B ‖U†‖² ‖U‖²)`.
///
/// `assumed` are the family's universal bounds; when absent they are computed.
pub fn certify_operator_image(
    fam: &WovenFamily,
    u: &Operator,
    assumed: Option<FrameBounds>,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let d = fam.dim();
    if u.shape() != (d, d) {
        return Err(FrameError::DimensionMismatch {
            expected: d,
            actual: if u.nrows() != d { u.nrows() } else { u.ncols() },
        });
    }
    let mut cert = Certificate::new(TheoremId::OperatorImage, "image family compressed to range(U)");
    let original = fam.universal_bounds(&cfg.strategy)?;
    let base = match assumed {
        Some(a) => {
            cert.record("assumed_A", a.lower);
            cert.record("assumed_B", a.upper);
            if !a.brackets(&original.bounds(), cfg.bound_tol) {
                return Ok(cert.inapplicable(format!(
                    "assumed bounds ({}, {}) are not universal bounds of the family ({}, {})",
                    a.lower, a.upper, original.lower, original.upper
                )));
            }
            a
        }
        None => original.bounds(),
    };
    cert.record("A", base.lower);
    cert.record("B", base.upper);
    if !base.is_frame(cfg.frame_tol) {
        return Ok(cert.inapplicable("family is not woven (universal lower bound is 0)"));
    }

    let range = range_subspace(u, cfg.rank_tol);
    let norm = operator_norm(u);
    let pinv_norm = operator_norm(&pseudo_inverse(u, cfg.rank_tol));
    cert.record("norm_U", norm);
    cert.record("norm_U_pinv", pinv_norm);
    cert.record("rank_U", range.dim() as f64);
    if range.dim() == 0 {
        return Ok(cert.inapplicable("U = 0 has trivial range"));
    }
    if range.dim() < d {
        cert.note("U is not invertible; only the closed-range form of the theorem applies");
    }
    let kappa2 = (norm * pinv_norm).powi(2);

    let image = image_family(fam, u, cfg.rank_tol)?;
    let actual = image.universal_bounds_on(&range, &cfg.strategy)?;
    let claimed = FrameBounds::new(base.lower / kappa2, base.upper * kappa2);
    Ok(cert.judge(claimed, actual, cfg.bound_tol))
}

/// `(closure(U F_i(x)), v_i(x))` for every member.
pub fn image_family(fam: &WovenFamily, u: &Operator, rank_tol: f64) -> Result<WovenFamily> {
    let members = fam
        .members()
        .iter()
        .map(|f| {
            let subspaces = f
                .subspaces()
                .iter()
                .map(|s| image_subspace(u, s, rank_tol))
                .collect::<Result<_>>()?;
            CFusionFrame::new(f.space().clone(), subspaces, f.weights().to_vec())
        })
        .collect::<Result<_>>()?;
    WovenFamily::new(members)
}

/// `max_{i, x} ‖P_{F_i(x)} P_W − P_W P_{F_i(x)}‖`.
pub fn max_commutator(fam: &WovenFamily, w: &Subspace) -> f64 {
    let pw = w.projector();
    fam.members()
        .iter()
        .flat_map(|f| f.projectors())
        .map(|p| operator_norm(&(p * &pw - &pw * p)))
        .fold(0.0, f64::max)
}

/// Intersecting every subspace with `W` keeps the universal bounds on `W`.
///
/// Gated on commuting projectors: without commutation `π_F π_W ≠ π_{F ∩ W}`.
pub fn certify_subspace_intersection(
    fam: &WovenFamily,
    w: &Subspace,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    if w.ambient_dim() != fam.dim() {
        return Err(FrameError::DimensionMismatch {
            expected: fam.dim(),
            actual: w.ambient_dim(),
        });
    }
    let mut cert = Certificate::new(
        TheoremId::SubspaceIntersection,
        "intersected family compressed to W",
    );
    let comm = max_commutator(fam, w);
    cert.record("max_commutator", comm);
    cert.record("dim_W", w.dim() as f64);
    if comm > cfg.commute_tol {
        return Ok(cert.inapplicable(format!(
            "projectors do not commute with P_W (max commutator {comm:.3e})"
        )));
    }
    if w.dim() == 0 {
        return Ok(cert.inapplicable("W is the zero subspace"));
    }
    let original = fam.universal_bounds(&cfg.strategy)?;
    cert.record("A", original.lower);
    cert.record("B", original.upper);
    if !original.bounds().is_frame(cfg.frame_tol) {
        return Ok(cert.inapplicable("family is not woven (universal lower bound is 0)"));
    }
    let members = fam
        .members()
        .iter()
        .map(|f| {
            let subspaces = f
                .subspaces()
                .iter()
                .map(|s| intersect_subspaces(s, w, cfg.rank_tol))
                .collect::<Result<_>>()?;
            CFusionFrame::new(f.space().clone(), subspaces, f.weights().to_vec())
        })
        .collect::<Result<_>>()?;
    let intersected = WovenFamily::new(members)?;
    let actual = intersected.universal_bounds_on(w, &cfg.strategy)?;
    Ok(cert.judge(original.bounds(), actual, cfg.bound_tol))
}

fn complement(nodes: &[usize], n: usize) -> Vec<usize> {
    let mut inside = vec![false; n];
    for &j in nodes {
        if j < n {
            inside[j] = true;
        }
    }
    (0..n).filter(|&j| !inside[j]).collect()
}

/// Woven on `Y` with bounds `(A, B_Y)` implies woven on `X` with `(A, Σ_i B_i)`.
pub fn certify_subset_extension(
    fam: &WovenFamily,
    subset: &[usize],
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let mut cert = Certificate::new(TheoremId::SubsetExtension, "family");
    let restricted = fam.restrict(subset)?;
    let on_subset = restricted.universal_bounds(&cfg.strategy)?;
    cert.record("A_Y", on_subset.lower);
    cert.record("B_Y", on_subset.upper);
    let bounds = fam.member_bounds()?;
    record_member_bounds(&mut cert, &bounds);
    let total = sum_upper(&bounds);
    cert.record("sum_B", total);
    if !on_subset.bounds().is_frame(cfg.frame_tol) {
        return Ok(cert.inapplicable("restriction to Y is not woven (lower bound 0)"));
    }
    let actual = fam.universal_bounds(&cfg.strategy)?;
    Ok(cert.judge(
        FrameBounds::new(on_subset.lower, total),
        actual,
        cfg.bound_tol,
    ))
}

/// `λ_max(Σ_{i ≠ n} Σ_{j ∉ Y} w_j v_{i,j}² P_{i,j})`, the least `D` in the removal hypothesis.
pub fn removal_constant(fam: &WovenFamily, subset: &[usize], keep: usize) -> Result<f64> {
    fam.member(keep)?;
    let outside = complement(subset, fam.node_count());
    if outside.is_empty() {
        return Ok(0.0);
    }
    let others: Vec<usize> = (0..fam.member_count()).filter(|&i| i != keep).collect();
    let (_, hi) = extreme_eigs(&fam.partial_operator(&others, &outside)?)?;
    Ok(hi.max(0.0))
}

/// Dropping the nodes outside `Y` costs at most `D` of the lower bound.
///
/// `supplied_d` is raised to the optimal constant if it is too small.
pub fn certify_removal(
    fam: &WovenFamily,
    subset: &[usize],
    keep: usize,
    supplied_d: Option<f64>,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let mut cert = Certificate::new(TheoremId::Removal, "family restricted to Y");
    let restricted = fam.restrict(subset)?;
    let optimal = removal_constant(fam, subset, keep)?;
    let d = match supplied_d {
        Some(s) if s >= optimal => s,
        Some(s) => {
            cert.note(format!("supplied D = {s} is below the optimal {optimal}; clamped"));
            optimal
        }
        None => optimal,
    };
    cert.record("n", keep as f64);
    cert.record("D", d);
    let original = fam.universal_bounds(&cfg.strategy)?;
    cert.record("A", original.lower);
    cert.record("B", original.upper);
    if !original.bounds().is_frame(cfg.frame_tol) {
        return Ok(cert.inapplicable("family is not woven on X (universal lower bound is 0)"));
    }
    if d >= original.lower {
        return Ok(cert.inapplicable(format!(
            "D = {d} is not below A = {}",
            original.lower
        )));
    }
    let actual = restricted.universal_bounds(&cfg.strategy)?;
    Ok(cert.judge(
        FrameBounds::new(original.lower - d, original.upper),
        actual,
        cfg.bound_tol,
    ))
}

/// Least `N ≥ 0` with `M ≼ N a² P_a` and `M ≼ N b² P_b` at every node and for
/// every pair of members, where `M = (a P_a − b P_b)ᴴ (a P_a − b P_b)`.
///
/// `+∞` when some `M` is not supported inside the range of `P_a` or `P_b`.
pub fn compute_min_closeness_n(fam: &WovenFamily) -> f64 {
    let members = fam.members();
    let mut worst: f64 = 0.0;
    for j in 0..fam.node_count() {
        for (i, fi) in members.iter().enumerate() {
            for fk in &members[i + 1..] {
                let (a, pa) = (fi.weights()[j], &fi.projectors()[j]);
                let (b, pk) = (fk.weights()[j], &fk.projectors()[j]);
                let diff = pa * Complex64::new(a, 0.0) - pk * Complex64::new(b, 0.0);
                let m = diff.adjoint() * &diff;
                // M is PSD, so its norm is λ_max.
                let m_norm = operator_norm(&m);
                if m_norm == 0.0 {
                    continue;
                }
                for (scale, p) in [(a, pa), (b, pk)] {
                    let leak = operator_norm(&(&m - &m * p));
                    if leak > 1e-9 * (1.0 + m_norm) {
                        return f64::INFINITY;
                    }
                    worst = worst.max(m_norm / (scale * scale));
                }
            }
        }
    }
    worst
}

/// Pointwise closeness `N` gives universal lower `Σ A_i / ((m−1)(N+1)+1)`.
pub fn certify_closeness_woven(
    fam: &WovenFamily,
    supplied_n: Option<f64>,
    cfg: &CertifyConfig,
) -> Result<Certificate> {
    let mut cert = Certificate::new(TheoremId::ClosenessWoven, "family");
    let optimal = compute_min_closeness_n(fam);
    let n = match supplied_n {
        Some(s) if s >= optimal => s,
        Some(s) => {
            cert.note(format!("supplied N = {s} is below the optimal {optimal}; clamped"));
            optimal
        }
        None => optimal,
    };
    cert.record("N", n);
    let bounds = fam.member_bounds()?;
    record_member_bounds(&mut cert, &bounds);
    if !n.is_finite() {
        return Ok(cert.inapplicable("no finite N: member subspaces differ at some node"));
    }
    if let Some(i) = bounds.iter().position(|b| !b.is_frame(cfg.frame_tol)) {
        return Ok(cert.inapplicable(format!("member {i} is not a frame")));
    }
    let m = fam.member_count() as f64;
    let sum_a: f64 = bounds.iter().map(|b| b.lower).sum();
    let total = sum_upper(&bounds);
    cert.record("sum_A", sum_a);
    cert.record("sum_B", total);
    let claimed_lower = sum_a / ((m - 1.0) * (n + 1.0) + 1.0);
    // Same argument with Minkowski's inequality in place of ‖a‖² ≤ ‖a−b‖² + ‖b‖².
    let minkowski_lower = sum_a / ((m - 1.0) * (1.0 + n.sqrt()).powi(2) + 1.0);
    cert.record("minkowski_lower", minkowski_lower);
    let actual = fam.universal_bounds(&cfg.strategy)?;
    if actual.lower < minkowski_lower - cfg.bound_tol {
        cert.note("true lower is below the Minkowski-form lower bound as well");
    }
    Ok(cert.judge(FrameBounds::new(claimed_lower, total), actual, cfg.bound_tol))
}

/// For a woven pair of frames, `B_1 + B_2` is not the optimal universal upper bound.
///
/// Passes when the gap `B_1 + B_2 − B_universal` exceeds `gap_margin · (B_1 + B_2)`.
/// A positive gap under the margin is recorded and still passes; a gap at
/// round-off level fails.
pub fn certify_upper_not_optimal(fam: &WovenFamily, cfg: &CertifyConfig) -> Result<Certificate> {
    let mut cert = Certificate::new(TheoremId::UpperNotOptimal, "family");
    if fam.member_count() != 2 {
        return Ok(cert.inapplicable(format!(
            "needs exactly 2 members, got {}",
            fam.member_count()
        )));
    }
    let bounds = fam.member_bounds()?;
    record_member_bounds(&mut cert, &bounds);
    if let Some(i) = bounds.iter().position(|b| !b.is_frame(cfg.frame_tol)) {
        return Ok(cert.inapplicable(format!("member {i} is not a frame")));
    }
    let total = sum_upper(&bounds);
    let actual = fam.universal_bounds(&cfg.strategy)?;
    if !actual.bounds().is_frame(cfg.frame_tol) {
        cert.true_bounds = Some(actual);
        return Ok(cert.inapplicable("members are not woven (universal lower bound is 0)"));
    }
    let gap = total - actual.upper;
    let margin = cfg.gap_margin * total;
    cert.record("sum_B", total);
    cert.record("gap", gap);
    cert.record("margin", margin);
    let verdict = if gap > margin {
        Verdict::Pass
    } else if gap > cfg.bound_tol {
        cert.note(format!("gap {gap:.3e} is positive but below the margin {margin:.3e}"));
        Verdict::Pass
    } else {
        cert.note(format!("gap {gap:.3e}: B_1 + B_2 is attained"));
        Verdict::Fail
    };
    cert.claimed = Some(FrameBounds::new(0.0, total));
    cert.true_bounds = Some(actual);
    cert.verdict = verdict;
    Ok(cert)
}
