mod common;

use cfweave::certify::{
    certify_bessel_sum, certify_closeness_woven, certify_removal, certify_subset_extension,
    compute_min_closeness_n, CertifyConfig, Certificate, Verdict,
};
use cfweave::frame::CFusionFrame;
use cfweave::hilbert::{psd_le, random_partition, DiscretizedMeasureSpace, Partition, Subspace};
use cfweave::{SearchStrategy, WovenFamily};
use common::*;
use proptest::prelude::*;

fn small_family() -> impl Strategy<Value = WovenFamily> {
    (1usize..=4, 1usize..=6, 2usize..=3, any::<u64>())
        .prop_filter("nodes must be able to span", |(d, n, _, _)| n >= d)
        .prop_map(|(d, n, m, seed)| random_family(d, n, m, seed))
}

fn assert_invariant(c: &Certificate) {
    if c.verdict == Verdict::Pass {
        if let (Some(claimed), Some(actual)) = (c.claimed, c.true_bounds.as_ref()) {
            assert!(claimed.brackets(&actual.bounds(), 1e-8), "{c:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exhaustive_matches_brute_force(fam in small_family()) {
        let ub = fam.universal_bounds(&SearchStrategy::default()).unwrap();
        let (lo, hi) = oracle_universal(&fam);
        prop_assert!(ub.certified);
        prop_assert!((ub.lower - lo).abs() <= 1e-9 && (ub.upper - hi).abs() <= 1e-9);
        let at_lo = fam.weaving_bounds(&ub.lower_witness).unwrap();
        let at_hi = fam.weaving_bounds(&ub.upper_witness).unwrap();
        prop_assert!((at_lo.lower - ub.lower).abs() <= 1e-9);
        prop_assert!((at_hi.upper - ub.upper).abs() <= 1e-9);
    }

    #[test]
    fn weaving_operator_matches_direct_sum(fam in small_family(), seed in any::<u64>()) {
        let p = random_partition(fam.node_count(), fam.member_count(), seed).unwrap();
        let s = fam.weaving_operator(&p).unwrap();
        prop_assert!((s - oracle_weaving_operator(&fam, p.assignment())).norm() <= 1e-10);
    }

    #[test]
    fn adding_nodes_is_monotone(fam in small_family(), seed in any::<u64>()) {
        // Restricting to a prefix of nodes drops contributions, never adds them.
        let p = random_partition(fam.node_count(), fam.member_count(), seed).unwrap();
        let n = fam.node_count();
        let full = fam.weaving_operator(&p).unwrap();
        for keep in 1..n {
            let nodes: Vec<usize> = (0..keep).collect();
            let sub = fam.restrict(&nodes).unwrap();
            let q = Partition::new(fam.member_count(), p.assignment()[..keep].to_vec()).unwrap();
            prop_assert!(psd_le(&sub.weaving_operator(&q).unwrap(), &full, 1e-10).unwrap());
        }
    }

    #[test]
    fn identical_members_ignore_the_partition(fam in small_family(), seed in any::<u64>()) {
        let f = fam.member(0).unwrap().clone();
        let copies = WovenFamily::new(vec![f.clone(); fam.member_count()]).unwrap();
        let p = random_partition(copies.node_count(), copies.member_count(), seed).unwrap();
        prop_assert_eq!(copies.weaving_operator(&p).unwrap(), f.frame_operator());
    }

    #[test]
    fn searches_are_bracketed(fam in small_family(), seed in any::<u64>()) {
        let exact = fam.universal_bounds(&SearchStrategy::default()).unwrap();
        for s in [
            SearchStrategy::Sampled { samples: 20, seed },
            SearchStrategy::Descent { restarts: 3, seed },
        ] {
            let b = fam.universal_bounds(&s).unwrap();
            prop_assert!(!b.certified);
            prop_assert!(b.lower >= exact.lower - 1e-12 && b.upper <= exact.upper + 1e-12);
        }
    }

    #[test]
    fn bessel_sum_never_fails(fam in small_family()) {
        let c = certify_bessel_sum(&fam, &CertifyConfig::default()).unwrap();
        prop_assert_eq!(c.verdict, Verdict::Pass);
        assert_invariant(&c);
    }

    #[test]
    fn min_closeness_matches_bisection(d in 1usize..=3, n in 1usize..=4, seed in any::<u64>()) {
        let fam = shared_subspace_family(d, n.max(d), 2, &mut rng(seed));
        let fast = compute_min_closeness_n(&fam);
        let slow = oracle_min_closeness(&fam);
        prop_assert!((fast - slow).abs() <= 1e-8 * (1.0 + slow), "{} vs {}", fast, slow);
    }

    #[test]
    fn mismatched_subspaces_have_no_closeness_constant(fam in small_family()) {
        let generic = (0..fam.node_count()).any(|j| {
            let p0 = &fam.member(0).unwrap().projectors()[j];
            let p1 = &fam.member(1).unwrap().projectors()[j];
            (p0 - p1).norm() > 1e-6
        });
        if generic {
            prop_assert_eq!(compute_min_closeness_n(&fam), f64::INFINITY);
            prop_assert_eq!(oracle_min_closeness(&fam), f64::INFINITY);
        }
    }

    #[test]
    fn subset_and_removal_certificates_hold(fam in small_family(), mask in any::<u8>(), keep in 0usize..3) {
        let n = fam.node_count();
        let subset: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        prop_assume!(!subset.is_empty());
        let cfg = CertifyConfig::default();
        let c = certify_subset_extension(&fam, &subset, &cfg).unwrap();
        prop_assert_ne!(c.verdict, Verdict::Fail);
        assert_invariant(&c);
        let c = certify_removal(&fam, &subset, keep % fam.member_count(), None, &cfg).unwrap();
        prop_assert_ne!(c.verdict, Verdict::Fail);
        assert_invariant(&c);
    }
}

#[test]
fn closeness_bound_fails_on_one_dimensional_pair() {
    // Weights (1, s) and (s, 1) on two atoms of ℂ¹: N = (1−s)²/s², the best
    // weaving picks s on both atoms.
    let s: f64 = 0.5;
    let space = DiscretizedMeasureSpace::counting(2).unwrap();
    let line = Subspace::full(1);
    let f = CFusionFrame::new(space.clone(), vec![line.clone(), line.clone()], vec![1.0, s]).unwrap();
    let g = CFusionFrame::new(space, vec![line.clone(), line], vec![s, 1.0]).unwrap();
    let fam = WovenFamily::new(vec![f, g]).unwrap();
    let n = compute_min_closeness_n(&fam);
    assert!((n - (1.0 - s).powi(2) / (s * s)).abs() < 1e-12);
    let c = certify_closeness_woven(&fam, None, &CertifyConfig::default()).unwrap();
    let sum_a = 2.0 * (1.0 + s * s);
    let claimed = sum_a / (n + 2.0);
    assert!((c.claimed.unwrap().lower - claimed).abs() < 1e-12);
    assert!((c.true_bounds.as_ref().unwrap().lower - 2.0 * s * s).abs() < 1e-12);
    assert_eq!(c.verdict, Verdict::Fail);
    // The Minkowski form of the same argument is tight here.
    let mink = c.hypothesis("minkowski_lower").unwrap();
    assert!((mink - 2.0 * s * s).abs() < 1e-12);
}
