use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, FrameError, Result};

pub type Scalar = Complex64;
/// Element of `ℂ^d`.
pub type Vector = DVector<Complex64>;
/// Bounded operator between finite-dimensional spaces, as a dense matrix.
pub type Operator = DMatrix<Complex64>;

/// Relative singular-value cutoff used for ranks, spans and pseudo-inverses.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Relative asymmetry tolerated by [`extreme_eigs`].
pub const SELF_ADJOINT_TOL: f64 = 1e-9;
/// Eigenvalue window around 1 that marks a common direction of two subspaces.
pub const INTERSECTION_TOL: f64 = 1e-8;
/// Relative residual below which a Douglas factorization is accepted.
pub const DOUGLAS_RESIDUAL_TOL: f64 = 1e-9;

/// Thin SVD `m = U Σ Vᴴ`, singular values descending. Computed with faer:
/// nalgebra's SVD loses accuracy on inputs with exactly zero singular values.
struct Svd {
    s: Vec<f64>,
    u: Operator,
    v: Operator,
}

impl Svd {
    fn new(m: &Operator) -> Self {
        let a = faer::Mat::<Complex64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
        let Ok(svd) = a.thin_svd() else {
            return Self {
                s: Vec::new(),
                u: Operator::zeros(m.nrows(), 0),
                v: Operator::zeros(m.ncols(), 0),
            };
        };
        let (u, v) = (svd.U(), svd.V());
        let k = u.ncols();
        let s = svd.S().column_vector();
        Self {
            s: (0..k).map(|i| s[i].re).collect(),
            u: Operator::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
            v: Operator::from_fn(m.ncols(), k, |i, j| v[(i, j)]),
        }
    }

    /// Absolute threshold `rank_tol · σ_max`, or `None` for a zero or non-finite matrix.
    fn cutoff(&self, rank_tol: f64) -> Option<f64> {
        let smax = self.s.iter().copied().fold(0.0, f64::max);
        (smax.is_finite() && smax > 0.0).then_some(rank_tol * smax)
    }
}

pub fn real_vector(entries: &[f64]) -> Vector {
    Vector::from_iterator(entries.len(), entries.iter().map(|&x| Complex64::new(x, 0.0)))
}

/// Row-major real matrix embedded in the complex field.
pub fn real_operator(rows: usize, cols: usize, row_major: &[f64]) -> Operator {
    Operator::from_row_iterator(
        rows,
        cols,
        row_major.iter().map(|&x| Complex64::new(x, 0.0)),
    )
}

pub fn basis_vector(dim: usize, index: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    v[index] = Complex64::new(1.0, 0.0);
    v
}

/// Closed subspace of `ℂ^d`, stored as a `d × k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Operator,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            basis: Operator::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            basis: Operator::identity(ambient_dim, ambient_dim),
        }
    }

    /// Accepts a basis that is already orthonormal to within `1e-8`.
    pub fn from_orthonormal(basis: Operator) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.adjoint() * &basis;
        let dev = (gram - Operator::identity(k, k)).norm();
        if dev > 1e-8 {
            return Err(invalid(format!(
                "basis columns are not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Self { basis })
    }

    /// Orthonormal basis of the numerical span of `vectors`.
    ///
    /// Directions with singular value `≤ rank_tol · σ_max` are dropped. An empty
    /// list gives the zero subspace of dimension `ambient_dim`.
    pub fn from_spanning(ambient_dim: usize, vectors: &[Vector], rank_tol: f64) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(FrameError::DimensionMismatch {
                expected: ambient_dim,
                actual: v.len(),
            });
        }
        if vectors.is_empty() {
            return Ok(Self::zero(ambient_dim));
        }
        Ok(Self::column_span(&Operator::from_columns(vectors), rank_tol))
    }

    /// Orthonormal basis of the column space of `m`.
    pub fn column_span(m: &Operator, rank_tol: f64) -> Self {
        let d = m.nrows();
        if m.ncols() == 0 || d == 0 {
            return Self::zero(d);
        }
        let svd = Svd::new(m);
        let Some(cut) = svd.cutoff(rank_tol) else {
            return Self::zero(d);
        };
        let cols: Vec<_> = (0..svd.s.len())
            .filter(|&i| svd.s[i] > cut)
            .map(|i| svd.u.column(i).into_owned())
            .collect();
        if cols.is_empty() {
            return Self::zero(d);
        }
        Self {
            basis: Operator::from_columns(&cols),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Operator {
        &self.basis
    }

    pub fn projector(&self) -> Operator {
        projector(self)
    }

    /// Distance from `v` to the subspace.
    pub fn residual(&self, v: &Vector) -> f64 {
        let coeffs = self.basis.adjoint() * v;
        (v - &self.basis * coeffs).norm()
    }
}

/// Orthogonal projection onto `v`: `basis · basisᴴ`.
pub fn projector(v: &Subspace) -> Operator {
    let d = v.ambient_dim();
    if v.dim() == 0 {
        return Operator::zeros(d, d);
    }
    &v.basis * v.basis.adjoint()
}

/// Moore–Penrose pseudo-inverse with relative singular-value cutoff `rank_tol`.
pub fn pseudo_inverse(u: &Operator, rank_tol: f64) -> Operator {
    let (rows, cols) = u.shape();
    if rows == 0 || cols == 0 {
        return Operator::zeros(cols, rows);
    }
    let svd = Svd::new(u);
    let mut out = Operator::zeros(cols, rows);
    let Some(cut) = svd.cutoff(rank_tol) else {
        return out;
    };
    for (i, &s) in svd.s.iter().enumerate() {
        if s > cut {
            let vi = svd.v.column(i);
            let ui = svd.u.column(i).adjoint();
            out += (vi * ui) * Complex64::new(1.0 / s, 0.0);
        }
    }
    out
}

/// Largest singular value.
pub fn operator_norm(u: &Operator) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    u.clone().singular_values().max()
}

/// Outcome of [`douglas_factor`].
#[derive(Debug, Clone, PartialEq)]
pub enum DouglasFactor {
    /// `L1 = L2 · factor`, with `alpha = ‖factor‖²` the least `α` such that
    /// `L1 L1ᴴ ≼ α L2 L2ᴴ`.
    Feasible { factor: Operator, alpha: f64 },
    /// `range(L1) ⊄ range(L2)`; `residual = ‖L1 − L2 L2† L1‖`.
    Infeasible { residual: f64 },
}

impl DouglasFactor {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible { .. })
    }
}

/// Solves `L1 = L2 · U` in the least-squares sense and checks the residual.
///
/// The minimum-norm solution `U = L2† L1` is the unique factor with
/// `ker U = ker L1` and `range U ⊆ range L2ᴴ`.
pub fn douglas_factor(l1: &Operator, l2: &Operator) -> Result<DouglasFactor> {
    if l1.nrows() != l2.nrows() {
        return Err(FrameError::DimensionMismatch {
            expected: l2.nrows(),
            actual: l1.nrows(),
        });
    }
    let factor = pseudo_inverse(l2, DEFAULT_RANK_TOL) * l1;
    let residual = (l1 - l2 * &factor).norm();
    if residual > DOUGLAS_RESIDUAL_TOL * (1.0 + operator_norm(l1)) {
        return Ok(DouglasFactor::Infeasible { residual });
    }
    let alpha = operator_norm(&factor).powi(2);
    Ok(DouglasFactor::Feasible { factor, alpha })
}

fn check_square(s: &Operator) -> Result<()> {
    if s.nrows() != s.ncols() {
        return Err(FrameError::DimensionMismatch {
            expected: s.nrows(),
            actual: s.ncols(),
        });
    }
    Ok(())
}

/// Hermitian part of `s`, or an error if `s` is visibly not self-adjoint.
fn hermitian_part(s: &Operator) -> Result<Operator> {
    check_square(s)?;
    let adj = s.adjoint();
    let asymmetry = (s - &adj).norm();
    let norm = s.norm();
    if asymmetry > SELF_ADJOINT_TOL * norm {
        return Err(FrameError::NotSelfAdjoint { asymmetry, norm });
    }
    Ok((s + adj) * Complex64::new(0.5, 0.0))
}

/// Eigenvalues of a self-adjoint operator, ascending.
pub fn hermitian_eigenvalues(s: &Operator) -> Result<Vec<f64>> {
    let h = hermitian_part(s)?;
    if h.is_empty() {
        return Ok(Vec::new());
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Eigenpairs of a self-adjoint operator, ascending by eigenvalue.
pub fn hermitian_eigen(s: &Operator) -> Result<(Vec<f64>, Operator)> {
    let h = hermitian_part(s)?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<_> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let vecs = if cols.is_empty() {
        Operator::zeros(s.nrows(), 0)
    } else {
        Operator::from_columns(&cols)
    };
    Ok((vals, vecs))
}

/// `(λ_min, λ_max)` of a self-adjoint operator.
pub fn extreme_eigs(s: &Operator) -> Result<(f64, f64)> {
    let vals = hermitian_eigenvalues(s)?;
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(invalid("extreme eigenvalues of a 0×0 operator are undefined")),
    }
}

/// `Qᴴ S Q` for a subspace with orthonormal basis `Q`.
pub fn compress(s: &Operator, onto: &Subspace) -> Operator {
    onto.basis.adjoint() * s * &onto.basis
}

/// `a ≼ b + tol·I` in the Loewner order.
pub fn psd_le(a: &Operator, b: &Operator, tol: f64) -> Result<bool> {
    let (lo, _) = extreme_eigs(&(b - a))?;
    Ok(lo >= -tol)
}

/// Orthonormal basis of `U · V`.
pub fn image_subspace(u: &Operator, v: &Subspace, rank_tol: f64) -> Result<Subspace> {
    if u.ncols() != v.ambient_dim() {
        return Err(FrameError::DimensionMismatch {
            expected: u.ncols(),
            actual: v.ambient_dim(),
        });
    }
    if v.dim() == 0 {
        return Ok(Subspace::zero(u.nrows()));
    }
    Ok(Subspace::column_span(&(u * v.basis()), rank_tol))
}

/// Orthonormal basis of the range of `u`.
pub fn range_subspace(u: &Operator, rank_tol: f64) -> Subspace {
    Subspace::column_span(u, rank_tol)
}

/// `V ∩ W` from the eigenvectors of `P_V P_W P_V` with eigenvalue 1.
pub fn intersect_subspaces(v: &Subspace, w: &Subspace, rank_tol: f64) -> Result<Subspace> {
    let d = v.ambient_dim();
    if w.ambient_dim() != d {
        return Err(FrameError::DimensionMismatch {
            expected: d,
            actual: w.ambient_dim(),
        });
    }
    if v.dim() == 0 || w.dim() == 0 {
        return Ok(Subspace::zero(d));
    }
    let pv = projector(v);
    let pw = projector(w);
    let sandwich = &pv * &pw * &pv;
    let (vals, vecs) = hermitian_eigen(&sandwich)?;
    let common: Vec<Vector> = vals
        .iter()
        .enumerate()
        .filter(|(_, &lam)| (lam - 1.0).abs() <= INTERSECTION_TOL)
        .map(|(i, _)| vecs.column(i).into_owned())
        .collect();
    Subspace::from_spanning(d, &common, rank_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Operator, b: &Operator, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn rank_deficient_pseudo_inverse() {
        use crate::instances::random_complex_matrix;
        use rand::SeedableRng;
        // Products of thin Gaussian factors often carry exactly zero singular values.
        let mut g = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let u = random_complex_matrix(7, 2, &mut g) * random_complex_matrix(2, 7, &mut g);
            let pinv = pseudo_inverse(&u, DEFAULT_RANK_TOL);
            assert!(close(&(&u * &pinv * &u), &u, 1e-10 * u.norm()));
            assert_eq!(range_subspace(&u, DEFAULT_RANK_TOL).dim(), 2);
            let p = range_subspace(&pinv, DEFAULT_RANK_TOL).projector();
            assert!(close(&(&pinv * &u), &p, 1e-10));
        }
    }

    #[test]
    fn projector_examples() {
        let e1 = Subspace::from_spanning(2, &[basis_vector(2, 0)], DEFAULT_RANK_TOL).unwrap();
        assert!(close(
            &projector(&e1),
            &real_operator(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            1e-14
        ));
        let diag = Subspace::from_spanning(2, &[real_vector(&[1.0, 1.0])], DEFAULT_RANK_TOL)
            .unwrap();
        assert!(close(
            &projector(&diag),
            &real_operator(2, 2, &[0.5, 0.5, 0.5, 0.5]),
            1e-14
        ));
        assert_eq!(projector(&Subspace::zero(3)), Operator::zeros(3, 3));
    }

    #[test]
    fn spanning_ranks() {
        let tol = DEFAULT_RANK_TOL;
        let e1 = basis_vector(2, 0);
        let s = Subspace::from_spanning(2, &[e1.clone(), e1.clone() * Complex64::new(2.0, 0.0)], tol)
            .unwrap();
        assert_eq!(s.dim(), 1);
        let s = Subspace::from_spanning(2, &[e1, basis_vector(2, 1)], tol).unwrap();
        assert_eq!(s.dim(), 2);
        // Singular values of [[1,1],[0,1e-14],[0,0]] are ≈ √2 and ≈ 7e-15.
        let s = Subspace::from_spanning(
            3,
            &[real_vector(&[1.0, 0.0, 0.0]), real_vector(&[1.0, 1e-14, 0.0])],
            1e-10,
        )
        .unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(Subspace::from_spanning(4, &[], tol).unwrap().dim(), 0);
        assert!(Subspace::from_spanning(2, &[basis_vector(3, 0)], tol).is_err());
    }

    #[test]
    fn pseudo_inverse_examples() {
        let id = Operator::identity(3, 3);
        assert!(close(&pseudo_inverse(&id, DEFAULT_RANK_TOL), &id, 1e-14));
        let d = real_operator(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let di = real_operator(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        assert!(close(&pseudo_inverse(&d, DEFAULT_RANK_TOL), &di, 1e-14));
        let z = Operator::zeros(2, 3);
        assert_eq!(pseudo_inverse(&z, DEFAULT_RANK_TOL), Operator::zeros(3, 2));
    }

    #[test]
    fn pseudo_inverse_penrose_identities() {
        let u = real_operator(3, 2, &[1.0, 2.0, -0.5, 0.3, 0.7, -1.1]);
        let p = pseudo_inverse(&u, DEFAULT_RANK_TOL);
        assert!(close(&(&u * &p * &u), &u, 1e-10));
        assert!(close(&(&p * &u * &p), &p, 1e-10));
        let up = &u * &p;
        assert!(close(&up.adjoint(), &up, 1e-10));
        let pu = &p * &u;
        assert!(close(&pu.adjoint(), &pu, 1e-10));
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&Operator::identity(3, 3)) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&real_operator(2, 2, &[2.0, 0.0, 0.0, -5.0])) - 5.0).abs() < 1e-14);
        assert!((operator_norm(&real_operator(2, 2, &[0.0, 1.0, 0.0, 0.0])) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extreme_eig_examples() {
        let (lo, hi) = extreme_eigs(&real_operator(2, 2, &[1.0, 0.0, 0.0, 3.0])).unwrap();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
        assert_eq!(extreme_eigs(&Operator::zeros(2, 2)).unwrap(), (0.0, 0.0));
        let (lo, hi) = extreme_eigs(&real_operator(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((lo - 1.0).abs() < 1e-13 && (hi - 3.0).abs() < 1e-13);
    }

    #[test]
    fn extreme_eigs_rejects_asymmetry() {
        let s = real_operator(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(extreme_eigs(&s), Err(FrameError::NotSelfAdjoint { .. })));
        // Round-off-sized asymmetry is symmetrized away.
        let s = real_operator(2, 2, &[1.0, 1.0 + 1e-14, 1.0, 1.0]);
        assert!(extreme_eigs(&s).is_ok());
    }

    #[test]
    fn douglas_examples() {
        let id = Operator::identity(2, 2);
        let d10 = real_operator(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        match douglas_factor(&Operator::zeros(2, 2), &id).unwrap() {
            DouglasFactor::Feasible { factor, alpha } => {
                assert_eq!(alpha, 0.0);
                assert!(factor.norm() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        match douglas_factor(&d10, &id).unwrap() {
            DouglasFactor::Feasible { factor, alpha } => {
                assert!(close(&factor, &d10, 1e-14));
                assert!((alpha - 1.0).abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        assert!(!douglas_factor(&id, &d10).unwrap().is_feasible());
        assert!(douglas_factor(&id, &Operator::identity(3, 3)).is_err());
    }

    #[test]
    fn image_examples() {
        let shift = real_operator(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e1 = Subspace::from_spanning(2, &[basis_vector(2, 0)], DEFAULT_RANK_TOL).unwrap();
        let img = image_subspace(&shift, &e1, DEFAULT_RANK_TOL).unwrap();
        let e2 = Subspace::from_spanning(2, &[basis_vector(2, 1)], DEFAULT_RANK_TOL).unwrap();
        assert!(close(&projector(&img), &projector(&e2), 1e-14));
        let img = image_subspace(&Operator::zeros(2, 2), &e1, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(img.dim(), 0);
    }

    #[test]
    fn intersection_examples() {
        let tol = DEFAULT_RANK_TOL;
        let e = |i| basis_vector(3, i);
        let v = Subspace::from_spanning(3, &[e(0), e(1)], tol).unwrap();
        let w = Subspace::from_spanning(3, &[e(1), e(2)], tol).unwrap();
        let x = intersect_subspaces(&v, &w, tol).unwrap();
        assert_eq!(x.dim(), 1);
        assert!(close(&projector(&x), &projector(&Subspace::from_spanning(3, &[e(1)], tol).unwrap()), 1e-12));
        let vv = intersect_subspaces(&v, &v, tol).unwrap();
        assert_eq!(vv.dim(), 2);
        assert!(close(&projector(&vv), &projector(&v), 1e-12));
        assert_eq!(intersect_subspaces(&v, &Subspace::zero(3), tol).unwrap().dim(), 0);
    }
}
