#![allow(dead_code)]

use cfweave::frame::CFusionFrame;
use cfweave::hilbert::{basis_vector, DiscretizedMeasureSpace, Operator, Subspace, DEFAULT_RANK_TOL};
use cfweave::instances::{random_fusion_family, random_subspace, RandomFamilyParams};
use cfweave::WovenFamily;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_family(d: usize, n: usize, m: usize, seed: u64) -> WovenFamily {
    random_fusion_family(&RandomFamilyParams {
        dim: d,
        nodes: n,
        members: m,
        dim_range: (1, d),
        weight_range: (0.25, 2.0),
        seed,
    })
    .unwrap()
}

pub fn axis_subspace(d: usize, axes: &[usize]) -> Subspace {
    let vs: Vec<_> = axes.iter().map(|&i| basis_vector(d, i)).collect();
    Subspace::from_spanning(d, &vs, DEFAULT_RANK_TOL).unwrap()
}

/// Every node subspace is spanned by coordinate axes, so all projectors commute
/// with any axis-aligned `P_W`.
pub fn axis_family<R: Rng>(d: usize, n: usize, m: usize, rng: &mut R) -> WovenFamily {
    let space = DiscretizedMeasureSpace::new((0..n).map(|_| rng.random_range(0.5..1.5)).collect())
        .unwrap();
    let members = (0..m)
        .map(|_| loop {
            let subs = (0..n)
                .map(|_| {
                    let axes: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.5)).collect();
                    axis_subspace(d, &axes)
                })
                .collect();
            let weights = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            let f = CFusionFrame::new(space.clone(), subs, weights).unwrap();
            if f.bounds().unwrap().lower > 1e-6 {
                break f;
            }
        })
        .collect();
    WovenFamily::new(members).unwrap()
}

/// Members share their node subspaces and differ only in weights, so the
/// closeness constant is finite.
pub fn shared_subspace_family<R: Rng>(d: usize, n: usize, m: usize, rng: &mut R) -> WovenFamily {
    let space = DiscretizedMeasureSpace::counting(n).unwrap();
    loop {
        let subs: Vec<Subspace> = (0..n)
            .map(|_| {
                let k = rng.random_range(1..=d);
                random_subspace(d, k, rng)
            })
            .collect();
        let members: Vec<_> = (0..m)
            .map(|_| {
                let weights = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
                CFusionFrame::new(space.clone(), subs.clone(), weights).unwrap()
            })
            .collect();
        if members.iter().all(|f| f.bounds().unwrap().lower > 1e-6) {
            return WovenFamily::new(members).unwrap();
        }
    }
}

/// Real symmetric embedding `[[Re, −Im], [Im, Re]]`; each eigenvalue of a
/// Hermitian matrix appears twice in it.
pub fn realify(s: &Operator) -> DMatrix<f64> {
    let d = s.nrows();
    DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let z = s[(r % d, c % d)];
        match (r < d, c < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn oracle_extremes(s: &Operator) -> (f64, f64) {
    let r = realify(s);
    let r = (&r + r.transpose()) * 0.5;
    let eig = r.symmetric_eigenvalues();
    (eig.min(), eig.max())
}

/// `Σ_j w_j v_{p_j,j}² Q Qᴴ` assembled from the stored bases.
pub fn oracle_weaving_operator(fam: &WovenFamily, assignment: &[usize]) -> Operator {
    let d = fam.dim();
    let mut s = Operator::zeros(d, d);
    for (j, &i) in assignment.iter().enumerate() {
        let f = &fam.members()[i];
        let q = f.subspaces()[j].basis();
        let c = fam.space().weight(j) * f.weights()[j].powi(2);
        s += q * q.adjoint() * Complex64::new(c, 0.0);
    }
    s
}

/// Brute-force universal bounds with a hand-rolled mixed-radix counter.
pub fn oracle_universal(fam: &WovenFamily) -> (f64, f64) {
    let n = fam.node_count();
    let m = fam.member_count();
    let mut digits = vec![0usize; n];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    loop {
        let (a, b) = oracle_extremes(&oracle_weaving_operator(fam, &digits));
        lo = lo.min(a);
        hi = hi.max(b);
        let mut k = n;
        loop {
            if k == 0 {
                return (lo.max(0.0), hi);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < m {
                break;
            }
            digits[k] = 0;
        }
    }
}

pub fn is_psd(s: &Operator, tol: f64) -> bool {
    oracle_extremes(s).0 >= -tol
}

/// Least `N` with `M ≼ N c² P` by bisection on PSD feasibility; `∞` if even
/// `N = 1e12` is infeasible.
pub fn bisect_closeness(m: &Operator, c: f64, p: &Operator) -> f64 {
    let feasible = |n: f64| is_psd(&(p * Complex64::new(n * c * c, 0.0) - m), 1e-10);
    if feasible(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !feasible(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

pub fn oracle_min_closeness(fam: &WovenFamily) -> f64 {
    let mut worst: f64 = 0.0;
    let ms = fam.members();
    for j in 0..fam.node_count() {
        for i in 0..ms.len() {
            for k in i + 1..ms.len() {
                let (a, pa) = (ms[i].weights()[j], ms[i].subspaces()[j].projector());
                let (b, pb) = (ms[k].weights()[j], ms[k].subspaces()[j].projector());
                let diff = &pa * Complex64::new(a, 0.0) - &pb * Complex64::new(b, 0.0);
                let m = diff.adjoint() * &diff;
                worst = worst.max(bisect_closeness(&m, a, &pa));
                worst = worst.max(bisect_closeness(&m, b, &pb));
            }
        }
    }
    worst
}

pub fn random_operator<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Operator {
    cfweave::instances::random_complex_matrix(rows, cols, rng)
}

pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> Operator {
    random_subspace(d, d, rng).basis().clone()
}
