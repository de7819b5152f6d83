mod common;

use std::collections::HashSet;

use cfweave::hilbert::{
    douglas_factor, image_subspace, intersect_subspaces, partitions_exhaustive, projector,
    pseudo_inverse, range_subspace, DouglasFactor, Operator, Subspace, DEFAULT_RANK_TOL,
};
use cfweave::instances::random_subspace;
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Low-rank `rows × cols` operator of rank at most `rank`.
fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> Operator {
    let mut r = rng(seed);
    random_operator(rows, rank, &mut r) * random_operator(rank, cols, &mut r)
}

/// Least `α` on a grid refined by bisection with `L1 L1ᴴ ≼ α L2 L2ᴴ`.
fn alpha_scan(l1: &Operator, l2: &Operator) -> f64 {
    let a = l1 * l1.adjoint();
    let b = l2 * l2.adjoint();
    let ok = |alpha: f64| is_psd(&(&b * c(alpha) - &a), 1e-9 * (1.0 + alpha));
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projector_laws(d in 1usize..=8, k_frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let k = (k_frac * d as f64).round() as usize;
        let v = random_subspace(d, k, &mut rng(seed));
        let p = projector(&v);
        prop_assert!((&p * &p - &p).norm() <= 1e-10);
        prop_assert!((p.adjoint() - &p).norm() <= 1e-10);
        prop_assert!((p.trace().re - k as f64).abs() <= 1e-8);
    }

    #[test]
    fn compressed_adjoint_identity(d in 1usize..=8, k in 0usize..=8, r in 1usize..=8, seed in any::<u64>()) {
        let k = k.min(d);
        let mut g = rng(seed);
        let v = random_subspace(d, k, &mut g);
        let u = low_rank(d, d, r.min(d), seed ^ 1);
        let pv = v.projector();
        let puv = image_subspace(&u, &v, DEFAULT_RANK_TOL).unwrap().projector();
        let lhs = &pv * u.adjoint();
        prop_assert!((&lhs - &lhs * &puv).norm() <= 1e-9 * (1.0 + u.norm()));

        let w = random_unitary(d, &mut g);
        let pwv = image_subspace(&w, &v, DEFAULT_RANK_TOL).unwrap().projector();
        prop_assert!((&pwv * &w - &w * &pv).norm() <= 1e-9);
    }

    #[test]
    fn pseudo_inverse_range_projectors(rows in 1usize..=8, cols in 1usize..=8, r in 1usize..=8, seed in any::<u64>()) {
        let u = low_rank(rows, cols, r.min(rows).min(cols), seed);
        let pinv = pseudo_inverse(&u, DEFAULT_RANK_TOL);
        let scale = 1.0 + (u.norm() * pinv.norm());
        let p_range = range_subspace(&u, DEFAULT_RANK_TOL).projector();
        let p_corange = range_subspace(&pinv, DEFAULT_RANK_TOL).projector();
        prop_assert!((&u * &pinv - p_range).norm() <= 1e-9 * scale);
        prop_assert!((&pinv * &u - p_corange).norm() <= 1e-9 * scale);
        // U U† fixes range(U).
        let x = &u * random_operator(cols, 1, &mut rng(seed ^ 7));
        prop_assert!((&u * &pinv * &x - &x).norm() <= 1e-9 * scale * (1.0 + x.norm()));
    }

    #[test]
    fn douglas_factor_properties(d in 1usize..=6, r in 1usize..=6, seed in any::<u64>()) {
        let mut g = rng(seed);
        let l2 = low_rank(d, d, r.min(d), seed);
        let l1 = &l2 * random_operator(d, d, &mut g);
        match douglas_factor(&l1, &l2).unwrap() {
            DouglasFactor::Feasible { factor, alpha } => {
                prop_assert!((&l1 - &l2 * &factor).norm() <= 1e-9 * (1.0 + l1.norm()) * (1.0 + factor.norm()));
                let a = &l1 * l1.adjoint();
                let b = &l2 * l2.adjoint();
                let scale = 1.0 + a.norm();
                prop_assert!(is_psd(&(&b * c(alpha + 1e-8) - &a), 1e-9 * scale));
                prop_assert!(!is_psd(&(&b * c(alpha * (1.0 - 1e-6)) - &a), 1e-12 * scale));
                let oracle = alpha_scan(&l1, &l2);
                prop_assert!((oracle - alpha).abs() <= 1e-6 * (1.0 + alpha), "alpha {} oracle {}", alpha, oracle);
            }
            DouglasFactor::Infeasible { residual } => {
                prop_assert!(false, "range inclusion holds by construction, residual {}", residual);
            }
        }
    }

    #[test]
    fn douglas_detects_missing_range(d in 2usize..=6, seed in any::<u64>()) {
        let l2 = low_rank(d, d, d - 1, seed);
        let l1 = Operator::identity(d, d);
        prop_assert!(!douglas_factor(&l1, &l2).unwrap().is_feasible());
    }

    #[test]
    fn intersection_dimension_matches_rank(kv in 1usize..=5, kw in 1usize..=5, shared in 0usize..=3, seed in any::<u64>()) {
        let d = 6;
        let mut g = rng(seed);
        // Build V and W around a common part so the intersection is nontrivial.
        let common = random_subspace(d, shared.min(kv).min(kw), &mut g);
        let extend = |k: usize, g: &mut _| {
            let extra = random_subspace(d, k - common.dim(), g);
            let mut cols: Vec<_> = common.basis().column_iter().map(|c| c.into_owned()).collect();
            cols.extend(extra.basis().column_iter().map(|c| c.into_owned()));
            Subspace::from_spanning(d, &cols, DEFAULT_RANK_TOL).unwrap()
        };
        let v = extend(kv, &mut g);
        let w = extend(kw, &mut g);
        let i = intersect_subspaces(&v, &w, DEFAULT_RANK_TOL).unwrap();
        let stacked = Operator::from_fn(d, v.dim() + w.dim(), |r, col| {
            if col < v.dim() { v.basis()[(r, col)] } else { w.basis()[(r, col - v.dim())] }
        });
        let rank = stacked.rank(1e-8);
        prop_assert_eq!(i.dim(), v.dim() + w.dim() - rank);
        for b in i.basis().column_iter() {
            let b = b.into_owned();
            prop_assert!(v.residual(&b) <= 1e-8 && w.residual(&b) <= 1e-8);
        }
    }

    #[test]
    fn image_subspace_fixes_images(d in 1usize..=6, k in 0usize..=6, seed in any::<u64>()) {
        let mut g = rng(seed);
        let v = random_subspace(d, k.min(d), &mut g);
        let u = random_operator(d, d, &mut g);
        let p = image_subspace(&u, &v, DEFAULT_RANK_TOL).unwrap().projector();
        for b in v.basis().column_iter() {
            let ub = &u * b;
            prop_assert!((&p * &ub - &ub).norm() <= 1e-10 * (1.0 + ub.norm()));
        }
    }

    #[test]
    fn partition_enumeration_is_complete(n in 1usize..=6, m in 1usize..=4) {
        let all: Vec<_> = partitions_exhaustive(n, m, 1 << 20).unwrap().collect();
        prop_assert_eq!(all.len() as u64, (m as u64).pow(n as u32));
        let distinct: HashSet<_> = all.iter().map(|p| p.assignment().to_vec()).collect();
        prop_assert_eq!(distinct.len(), all.len());
        prop_assert!(all.windows(2).all(|w| w[0].assignment() < w[1].assignment()));
    }
}
