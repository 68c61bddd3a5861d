use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use mimo_dof::bounds::{outer_bound_general, outer_bound_hetnet, outer_bound_homogeneous, phi};
use mimo_dof::multiplicity::{index_groups, multiplicity_formula};
use mimo_dof::network::{realize_downlink, NetworkConfig};
use mimo_dof::numerics::{
    intersect_null_spaces, left_null_basis, null_basis, numerical_rank, CMatrix,
};
use mimo_dof::scheduler::{downlink_config, schedule_max_sinr, schedule_min_interf, user_stats};

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn null_bases_are_orthonormal_and_annihilate(rows in 1usize..7, cols in 1usize..7, seed: u64) {
        let a = CMatrix::random_gaussian(rows, cols, &mut rng(seed));
        let n = null_basis(&a).unwrap();
        prop_assert_eq!(n.cols(), cols.saturating_sub(rows));
        prop_assert!(n.orthonormality_defect() < 1e-12);
        prop_assert!((&a * &n).frobenius_norm() < 1e-12 * a.frobenius_norm().max(1.0));
        let ln = left_null_basis(&a).unwrap();
        prop_assert_eq!(ln.cols(), rows.saturating_sub(cols));
        prop_assert!((&ln.adjoint() * &a).frobenius_norm() < 1e-12 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn intersection_lies_in_every_left_null_space(n in 3usize..10, m in 1usize..3, count in 1usize..4, seed: u64) {
        prop_assume!(n > m);
        let mut r = rng(seed);
        let mats: Vec<CMatrix> = (0..count).map(|_| CMatrix::random_gaussian(n, m, &mut r)).collect();
        let refs: Vec<&CMatrix> = mats.iter().collect();
        let g = intersect_null_spaces(&refs).unwrap();
        prop_assert_eq!(g.cols(), n.saturating_sub(count * m));
        for a in &mats {
            prop_assert!((&a.adjoint() * &g).frobenius_norm() <= 1e-9);
        }
    }

    #[test]
    fn product_rank_is_the_smaller_outer_dimension(m in 1usize..5, l in 1usize..5, extra in 0usize..3, seed: u64) {
        let n = m.max(l) + extra;
        let mut r = rng(seed);
        let a = CMatrix::random_gaussian(m, n, &mut r);
        let b = CMatrix::random_gaussian(n, l, &mut r);
        prop_assert_eq!(numerical_rank(&(&a * &b)).unwrap().rank, m.min(l));
    }

    #[test]
    fn index_groups_cover_each_user_gamma_times(k in 1usize..12, g in 1usize..12) {
        prop_assume!(g <= k);
        let groups = index_groups(k, g).unwrap();
        prop_assert_eq!(groups.groups.len(), k);
        let mut counts = vec![0; k + 1];
        for group in &groups.groups {
            let mut sorted = group.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), g);
            for &u in group {
                counts[u] += 1;
            }
        }
        prop_assert!(counts[1..].iter().all(|&c| c == g));
    }

    #[test]
    fn multiplicity_formula_invariants(n in 2usize..60, m in 1usize..20, k in 1usize..10) {
        prop_assume!(n > m);
        let r = multiplicity_formula(n, m, k).unwrap();
        prop_assert_eq!(r.gamma, ((n - 1) / m).min(k));
        prop_assert_eq!(r.mu + r.gamma * m, n);
        prop_assert!(r.gamma >= 1);
        if (n - m).div_ceil(m) <= k {
            prop_assert!(r.mu >= 1 && r.mu <= m);
        }
    }

    #[test]
    fn hetnet_bound_is_homogeneous_of_degree_one(
        mac in proptest::collection::vec(1usize..6, 1..4),
        mac_rx in 1usize..8,
        ic in proptest::collection::vec((1usize..6, 1usize..6), 1..4),
        scale in 1usize..5,
    ) {
        let (ic_tx, ic_rx): (Vec<usize>, Vec<usize>) = ic.into_iter().unzip();
        let base = outer_bound_hetnet(&mac, mac_rx, &ic_tx, &ic_rx).unwrap();
        let up = |v: &[usize]| v.iter().map(|x| x * scale).collect::<Vec<_>>();
        let scaled = outer_bound_hetnet(&up(&mac), mac_rx * scale, &up(&ic_tx), &up(&ic_rx)).unwrap();
        prop_assert_eq!(scaled, base * BigRational::from_integer(BigInt::from(scale)));
    }

    #[test]
    fn tight_bound_never_exceeds_relaxed(
        l in 2usize..5,
        k in 1usize..4,
        tx in proptest::collection::vec(1usize..6, 16),
        rx in proptest::collection::vec(1usize..8, 4),
    ) {
        let cfg = NetworkConfig::heterogeneous(l, k, tx[..l * k].to_vec(), rx[..l].to_vec());
        let r = outer_bound_general(&cfg).unwrap();
        prop_assert!(&r.sigma_d <= r.branch("relaxed").unwrap());
        prop_assert!(&r.sigma_d <= r.branch("cooperative_tx").unwrap());
        prop_assert!(&r.sigma_d <= r.branch("cooperative_rx").unwrap());
    }

    #[test]
    fn theorem_value_at_most_corollary_value(l in 2usize..7, k in 1usize..7, m in 1usize..7, n in 1usize..7) {
        let cfg = NetworkConfig::homogeneous(l, k, m, n, 1);
        let general = outer_bound_general(&cfg).unwrap().sigma_d;
        let closed = outer_bound_homogeneous(&cfg).unwrap().sigma_d;
        prop_assert!(general <= closed);
    }

    #[test]
    fn phi_endpoints_equal_lk(l in 2usize..20, k in 1usize..20) {
        prop_assert_eq!(phi(1, l, k).unwrap(), l * k);
        prop_assert_eq!(phi(k, l, k).unwrap(), l * k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn min_interference_choice_ignores_serving_gain(l in 2usize..5, k in 1usize..6, seed: u64, scale in 0.1f64..10.0) {
        let ch = realize_downlink(&downlink_config(l, k), seed, 0).unwrap();
        let before = schedule_min_interf(&user_stats(&ch, 100.0).unwrap(), 100.0).unwrap();
        // Scaling every serving channel leaves the cross covariances, hence σ, untouched.
        let stats: Vec<_> = user_stats(&ch, 100.0)
            .unwrap()
            .into_iter()
            .map(|mut s| {
                s.lambda_max *= scale * scale;
                s
            })
            .collect();
        let after = schedule_min_interf(&stats, 100.0).unwrap();
        prop_assert_eq!(before.selected, after.selected);
    }

    #[test]
    fn max_sinr_choice_follows_user_relabeling(l in 2usize..5, k in 2usize..6, seed: u64, shift in 1usize..5) {
        let ch = realize_downlink(&downlink_config(l, k), seed, 0).unwrap();
        let stats = user_stats(&ch, 100.0).unwrap();
        let original = schedule_max_sinr(&stats, 100.0).unwrap();
        let relabeled: Vec<_> = stats
            .iter()
            .cloned()
            .map(|mut s| {
                s.user = (s.user + shift) % k;
                s
            })
            .collect();
        let moved = schedule_max_sinr(&relabeled, 100.0).unwrap();
        let expected: Vec<usize> = original.selected.iter().map(|&u| (u + shift) % k).collect();
        prop_assert_eq!(moved.selected, expected);
        prop_assert_eq!(moved.sum_rate, original.sum_rate);
    }

    #[test]
    fn min_interference_rate_never_beats_max_sinr_filter(l in 2usize..5, k in 1usize..6, seed: u64) {
        let ch = realize_downlink(&downlink_config(l, k), seed, 0).unwrap();
        let stats = user_stats(&ch, 1e3).unwrap();
        let pick = schedule_min_interf(&stats, 1e3).unwrap();
        for (m, &u) in pick.selected.iter().enumerate() {
            let s = &stats[m * k + u];
            prop_assert!(s.rate_min_interf <= s.rate_max_sinr * (1.0 + 1e-12) + 1e-12);
        }
    }
}
