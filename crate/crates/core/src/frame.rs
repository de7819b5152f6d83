//! c-frames and c-fusion frames over a [`DiscretizedMeasureSpace`].
//!
//! The field space `𝓛²(X, F)` carries the weighted inner product
//! `⟨f, g⟩ = Σ_j w_j ⟨f_j, g_j⟩`, so the synthesis matrix folds `√w_j` into
//! each block and its singular values are operator norms in that geometry.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, FrameError, Result};
use crate::hilbert::{
    check_node_subset, extreme_eigs, hermitian_eigenvalues, projector, DiscretizedMeasureSpace,
    Operator, Subspace, Vector,
};

/// Relative tolerance for `f(x) ∈ F(x)`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// `⟨a, b⟩`, linear in the first slot.
pub fn inner(a: &Vector, b: &Vector) -> Complex64 {
    b.dotc(a)
}

/// Lower and upper frame bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    #[serde(with = "crate::certify::real")]
    pub lower: f64,
    #[serde(with = "crate::certify::real")]
    pub upper: f64,
}

impl FrameBounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    /// Optimal bounds of a PSD frame operator. Round-off negatives are clamped to 0.
    pub fn of_operator(s: &Operator) -> Result<Self> {
        let (lo, hi) = extreme_eigs(s)?;
        Ok(Self {
            lower: lo.max(0.0),
            upper: hi.max(0.0),
        })
    }

    pub fn is_frame(&self, tol: f64) -> bool {
        self.lower > tol
    }

    pub fn is_parseval(&self, tol: f64) -> bool {
        (self.lower - 1.0).abs() <= tol && (self.upper - 1.0).abs() <= tol
    }

    /// `self` is at least as loose as `actual` on both sides, up to `tol`.
    pub fn brackets(&self, actual: &FrameBounds, tol: f64) -> bool {
        self.lower <= actual.lower + tol && self.upper >= actual.upper - tol
    }
}

/// A c-frame `F: X → ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CFrame {
    space: DiscretizedMeasureSpace,
    dim: usize,
    vectors: Vec<Vector>,
}

impl CFrame {
    pub fn new(space: DiscretizedMeasureSpace, vectors: Vec<Vector>) -> Result<Self> {
        if vectors.len() != space.node_count() {
            return Err(FrameError::LengthMismatch {
                expected: space.node_count(),
                actual: vectors.len(),
            });
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(invalid("vectors must have dimension > 0"));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(FrameError::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        Ok(Self { space, dim, vectors })
    }

    pub fn space(&self) -> &DiscretizedMeasureSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    /// `S = Σ_j w_j F_j F_jᴴ`.
    pub fn frame_operator(&self) -> Operator {
        let mut s = Operator::zeros(self.dim, self.dim);
        for (w, f) in self.space.weights().iter().zip(&self.vectors) {
            s += (f * f.adjoint()) * Complex64::new(*w, 0.0);
        }
        s
    }

    /// Optimal c-frame bounds; `lower == 0` means Bessel but not a frame.
    pub fn bounds(&self) -> Result<FrameBounds> {
        FrameBounds::of_operator(&self.frame_operator())
    }

    /// Bounds as a frame sequence: the lower bound is the smallest eigenvalue
    /// on the span, ignoring eigenvalues `≤ rank_tol · λ_max`.
    pub fn sequence_bounds(&self, rank_tol: f64) -> Result<FrameBounds> {
        let vals = hermitian_eigenvalues(&self.frame_operator())?;
        let hi = vals.last().copied().unwrap_or(0.0);
        if hi.is_nan() || hi <= 0.0 {
            return Err(invalid("frame sequence is identically zero"));
        }
        let lo = vals
            .iter()
            .copied()
            .find(|&l| l > rank_tol * hi)
            .unwrap_or(hi);
        Ok(FrameBounds::new(lo, hi))
    }

    /// `span{F(x) : x ∈ X}`.
    pub fn span(&self, rank_tol: f64) -> Result<Subspace> {
        Subspace::from_spanning(self.dim, &self.vectors, rank_tol)
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            dim: self.dim,
            vectors: self.vectors.iter().map(|v| v * alpha).collect(),
        }
    }
}

/// A c-fusion frame `(F, v)`: a subspace and a positive weight per node.
#[derive(Debug, Clone, PartialEq)]
pub struct CFusionFrame {
    space: DiscretizedMeasureSpace,
    dim: usize,
    subspaces: Vec<Subspace>,
    weights: Vec<f64>,
    projectors: Vec<Operator>,
}

impl CFusionFrame {
    pub fn new(
        space: DiscretizedMeasureSpace,
        subspaces: Vec<Subspace>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = space.node_count();
        for len in [subspaces.len(), weights.len()] {
            if len != n {
                return Err(FrameError::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        let dim = subspaces[0].ambient_dim();
        if dim == 0 {
            return Err(invalid("ambient dimension must be > 0"));
        }
        if let Some(s) = subspaces.iter().find(|s| s.ambient_dim() != dim) {
            return Err(FrameError::DimensionMismatch {
                expected: dim,
                actual: s.ambient_dim(),
            });
        }
        if let Some((j, v)) = weights
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(invalid(format!(
                "weight at node {j} is {v}; weights must be > 0 (drop zero-weight nodes)"
            )));
        }
        let projectors = subspaces.iter().map(projector).collect();
        Ok(Self {
            space,
            dim,
            subspaces,
            weights,
            projectors,
        })
    }

    /// `v_j = ‖F_j‖`, `F(x_j) = span{F_j}`; preserves the frame operator.
    pub fn from_cframe(frame: &CFrame, rank_tol: f64) -> Result<Self> {
        let mut subspaces = Vec::with_capacity(frame.vectors.len());
        let mut weights = Vec::with_capacity(frame.vectors.len());
        for (j, f) in frame.vectors.iter().enumerate() {
            let norm = f.norm();
            if norm == 0.0 {
                return Err(invalid(format!("zero vector at node {j}")));
            }
            subspaces.push(Subspace::from_spanning(frame.dim, std::slice::from_ref(f), rank_tol)?);
            weights.push(norm);
        }
        Self::new(frame.space.clone(), subspaces, weights)
    }

    pub fn space(&self) -> &DiscretizedMeasureSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.space.node_count()
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    /// Per-node terms `w_j v_j² P_j` of the frame operator.
    pub fn node_contributions(&self) -> Vec<Operator> {
        self.projectors
            .iter()
            .zip(&self.weights)
            .zip(self.space.weights())
            .map(|((p, v), w)| p * Complex64::new(w * v * v, 0.0))
            .collect()
    }

    /// `S_F = Σ_j w_j v_j² P_j`.
    pub fn frame_operator(&self) -> Operator {
        self.node_contributions()
            .into_iter()
            .fold(Operator::zeros(self.dim, self.dim), |acc, c| acc + c)
    }

    pub fn bounds(&self) -> Result<FrameBounds> {
        FrameBounds::of_operator(&self.frame_operator())
    }

    /// `T_F f = Σ_j w_j v_j f_j`, for `f ∈ 𝓛²(X, F)`.
    pub fn synthesis(&self, field: &Field) -> Result<Vector> {
        self.check_field(field)?;
        for (j, (f, p)) in field.values.iter().zip(&self.projectors).enumerate() {
            let residual = (p * f - f).norm();
            if residual > MEMBERSHIP_TOL * f.norm() {
                return Err(FrameError::MembershipViolation { node: j, residual });
            }
        }
        Ok(self.extended_synthesis(field))
    }

    /// `Σ_j w_j v_j P_j f_j` for an unconstrained field; equals [`Self::synthesis`]
    /// on `𝓛²(X, F)`.
    pub fn extended_synthesis(&self, field: &Field) -> Vector {
        let mut out = Vector::zeros(self.dim);
        for (j, f) in field.values.iter().enumerate() {
            let scale = self.space.weight(j) * self.weights[j];
            out += (&self.projectors[j] * f) * Complex64::new(scale, 0.0);
        }
        out
    }

    /// `T_F* h = (v_j P_j h)_j`.
    pub fn analysis(&self, h: &Vector) -> Result<Field> {
        if h.len() != self.dim {
            return Err(FrameError::DimensionMismatch {
                expected: self.dim,
                actual: h.len(),
            });
        }
        let values = self
            .projectors
            .iter()
            .zip(&self.weights)
            .map(|(p, v)| (p * h) * Complex64::new(*v, 0.0))
            .collect();
        Ok(Field {
            space: self.space.clone(),
            values,
        })
    }

    /// Block row `[√w_j v_j P_j]_j` of shape `d × (n·d)`; its Gram matrix is `S_F`.
    pub fn synthesis_matrix(&self) -> Operator {
        let d = self.dim;
        let n = self.node_count();
        let mut t = Operator::zeros(d, n * d);
        for (j, p) in self.projectors.iter().enumerate() {
            let scale = self.space.weight(j).sqrt() * self.weights[j];
            t.view_mut((0, j * d), (d, d))
                .copy_from(&(p * Complex64::new(scale, 0.0)));
        }
        t
    }

    /// The frame carried by a node subset.
    pub fn restrict(&self, nodes: &[usize]) -> Result<Self> {
        check_node_subset(nodes, self.node_count())?;
        Ok(Self {
            space: self.space.restrict(nodes)?,
            dim: self.dim,
            subspaces: nodes.iter().map(|&j| self.subspaces[j].clone()).collect(),
            weights: nodes.iter().map(|&j| self.weights[j]).collect(),
            projectors: nodes.iter().map(|&j| self.projectors[j].clone()).collect(),
        })
    }

    fn check_field(&self, field: &Field) -> Result<()> {
        if field.space != self.space {
            return Err(invalid("field lives on a different measure space"));
        }
        if let Some(v) = field.values.iter().find(|v| v.len() != self.dim) {
            return Err(FrameError::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        Ok(())
    }
}

/// A square-integrable vector field `f: X → ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    space: DiscretizedMeasureSpace,
    values: Vec<Vector>,
}

impl Field {
    pub fn new(space: DiscretizedMeasureSpace, values: Vec<Vector>) -> Result<Self> {
        if values.len() != space.node_count() {
            return Err(FrameError::LengthMismatch {
                expected: space.node_count(),
                actual: values.len(),
            });
        }
        Ok(Self { space, values })
    }

    pub fn zero(space: DiscretizedMeasureSpace, dim: usize) -> Self {
        let values = vec![Vector::zeros(dim); space.node_count()];
        Self { space, values }
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn space(&self) -> &DiscretizedMeasureSpace {
        &self.space
    }

    /// `Σ_j w_j ⟨f_j, g_j⟩`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        if self.space != other.space {
            return Err(invalid("fields live on different measure spaces"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.space.weights())
            .map(|((f, g), w)| inner(f, g) * *w)
            .sum())
    }

    pub fn norm_squared(&self) -> f64 {
        self.values
            .iter()
            .zip(self.space.weights())
            .map(|(f, w)| w * f.norm_squared())
            .sum()
    }

    /// Stacked coordinates `[√w_j f_j]_j`, the vector the synthesis matrix acts on.
    pub fn weighted_coordinates(&self) -> Vector {
        let d = self.values.first().map_or(0, |v| v.len());
        let mut out = Vector::zeros(d * self.values.len());
        for (j, (f, w)) in self.values.iter().zip(self.space.weights()).enumerate() {
            out.rows_mut(j * d, d)
                .copy_from(&(f * Complex64::new(w.sqrt(), 0.0)));
        }
        out
    }
}
