//! Reproducible instance generators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::frame::{CFrame, CFusionFrame};
use crate::hilbert::{basis_vector, DiscretizedMeasureSpace, Operator, Subspace, Vector};
use crate::weaving::WovenFamily;

/// Minimum `λ_min(S_F)` accepted for a generated member.
pub const MIN_MEMBER_LOWER: f64 = 1e-6;
const MAX_REDRAWS: usize = 1000;

/// Two Parseval frames for `ℝ²` on four counting-measure nodes, woven for every `ε > 0`:
/// `Φ = δ(e1, εe1, e2, εe2)`, `Ψ = δ(εe1, e1, εe2, e2)` with `δ = (1+ε²)^(-1/2)`.
pub fn paper_weaving_example(epsilon: f64) -> Result<(CFrame, CFrame)> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    let delta = (1.0 + epsilon * epsilon).powf(-0.5);
    let e = |i: usize, s: f64| basis_vector(2, i) * Complex64::new(delta * s, 0.0);
    let space = DiscretizedMeasureSpace::counting(4)?;
    let phi = CFrame::new(
        space.clone(),
        vec![e(0, 1.0), e(0, epsilon), e(1, 1.0), e(1, epsilon)],
    )?;
    let psi = CFrame::new(
        space,
        vec![e(0, epsilon), e(0, 1.0), e(1, epsilon), e(1, 1.0)],
    )?;
    Ok((phi, psi))
}

/// The example pair as a woven family of rank-one c-fusion frames.
pub fn paper_woven_family(epsilon: f64, rank_tol: f64) -> Result<WovenFamily> {
    let (phi, psi) = paper_weaving_example(epsilon)?;
    WovenFamily::new(vec![
        CFusionFrame::from_cframe(&phi, rank_tol)?,
        CFusionFrame::from_cframe(&psi, rank_tol)?,
    ])
}

/// Finite Gabor system on `ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborParams {
    pub dim: usize,
    pub window: Vector,
    /// `(a, b)` = (modulation, translation) pairs in `ℤ_d × ℤ_d`.
    pub lattice: Vec<(usize, usize)>,
    /// Window scale of the second system; needs `|α|² > 1`.
    pub alpha: Complex64,
}

impl GaborParams {
    pub fn full_lattice(window: Vector, alpha: Complex64) -> Self {
        let dim = window.len();
        let lattice = (0..dim)
            .flat_map(|a| (0..dim).map(move |b| (a, b)))
            .collect();
        Self {
            dim,
            window,
            lattice,
            alpha,
        }
    }
}

/// `(E_a T_b g)[t] = e^{2πi a t / d} · g[(t − b) mod d]`.
pub fn time_frequency_shift(g: &Vector, a: usize, b: usize) -> Vector {
    let d = g.len();
    Vector::from_fn(d, |t, _| {
        let phase = 2.0 * PI * ((a * t) % d) as f64 / d as f64;
        Complex64::from_polar(1.0, phase) * g[(t + d - b % d) % d]
    })
}

/// Gabor c-frames `F = (E_a T_b g)` and `G = (E_a T_b αg)`, one counting node per lattice point.
pub fn discrete_gabor(params: &GaborParams) -> Result<(CFrame, CFrame)> {
    let d = params.dim;
    if d == 0 || params.window.len() != d {
        return Err(invalid("window length must equal the dimension (> 0)"));
    }
    if params.window.norm() == 0.0 {
        return Err(invalid("Gabor window must be nonzero"));
    }
    if params.alpha.norm_sqr() <= 1.0 {
        return Err(invalid(format!(
            "scale alpha must satisfy |alpha|^2 > 1, got {}",
            params.alpha.norm_sqr()
        )));
    }
    if params.lattice.is_empty() {
        return Err(invalid("lattice must be non-empty"));
    }
    if let Some(&(a, b)) = params.lattice.iter().find(|(a, b)| *a >= d || *b >= d) {
        return Err(invalid(format!("lattice point ({a}, {b}) outside Z_{d} x Z_{d}")));
    }
    let space = DiscretizedMeasureSpace::counting(params.lattice.len())?;
    let f: Vec<Vector> = params
        .lattice
        .iter()
        .map(|&(a, b)| time_frequency_shift(&params.window, a, b))
        .collect();
    let g = f.iter().map(|v| v * params.alpha).collect();
    Ok((CFrame::new(space.clone(), f)?, CFrame::new(space, g)?))
}

/// Entries with independent standard normal real and imaginary parts.
pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Operator {
    Operator::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    loop {
        let v = random_complex_matrix(dim, 1, rng).column(0).into_owned();
        let norm = v.norm();
        if norm > 1e-12 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

/// Uniformly distributed `k`-dimensional subspace of `ℂ^d`.
pub fn random_subspace<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Subspace {
    if k == 0 {
        return Subspace::zero(dim);
    }
    loop {
        let s = Subspace::column_span(&random_complex_matrix(dim, k, rng), 1e-10);
        if s.dim() == k {
            return s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFamilyParams {
    pub dim: usize,
    pub nodes: usize,
    pub members: usize,
    /// Inclusive range of subspace dimensions.
    pub dim_range: (usize, usize),
    /// Range for both the node masses and the weights `v`.
    pub weight_range: (f64, f64),
    pub seed: u64,
}

impl RandomFamilyParams {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.dim_range;
        if self.dim == 0 || self.nodes == 0 {
            return Err(invalid("dimension and node count must be > 0"));
        }
        if self.members < 2 {
            return Err(invalid("need at least 2 members"));
        }
        if lo == 0 || lo > hi || hi > self.dim {
            return Err(invalid(format!(
                "dim_range ({lo}, {hi}) must satisfy 1 <= lo <= hi <= {}",
                self.dim
            )));
        }
        if self.nodes * hi < self.dim {
            return Err(invalid(format!(
                "{} nodes of dimension <= {hi} cannot span C^{}",
                self.nodes, self.dim
            )));
        }
        let (wl, wh) = self.weight_range;
        if !(wl.is_finite() && wh.is_finite() && wl > 0.0 && wl <= wh) {
            return Err(invalid(format!(
                "weight_range ({wl}, {wh}) must satisfy 0 < lo <= hi"
            )));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Random woven family; every member is a frame with `λ_min(S_F) ≥ 1e-6`.
pub fn random_fusion_family(params: &RandomFamilyParams) -> Result<WovenFamily> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let masses = (0..params.nodes)
        .map(|_| uniform(&mut rng, params.weight_range))
        .collect();
    let space = DiscretizedMeasureSpace::new(masses)?;
    let (lo, hi) = params.dim_range;
    let members = (0..params.members)
        .map(|_| {
            for _ in 0..MAX_REDRAWS {
                let subspaces = (0..params.nodes)
                    .map(|_| {
                        let k = rng.random_range(lo..=hi);
                        random_subspace(params.dim, k, &mut rng)
                    })
                    .collect();
                let weights = (0..params.nodes)
                    .map(|_| uniform(&mut rng, params.weight_range))
                    .collect();
                let member = CFusionFrame::new(space.clone(), subspaces, weights)?;
                if member.bounds()?.lower >= MIN_MEMBER_LOWER {
                    return Ok(member);
                }
            }
            Err(invalid("could not draw a member that is a frame"))
        })
        .collect::<Result<_>>()?;
    WovenFamily::new(members)
}
