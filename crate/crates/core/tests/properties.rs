mod support;

use fuzzex_core::baselines::{agglomerative, dbscan, Linkage};
use fuzzex_core::fuzzy::{fcm_type1_with_init, fcm_type2_observed, fcm_type2_with_init, FcmConfig};
use fuzzex_core::metrics::{assignment_entropy, silhouette};
use fuzzex_core::ndarray::Axis;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn silhouette_matches_pairwise_oracle(
        seed in any::<u64>(), n in 2usize..=200, d in 1usize..=4, c in 2usize..=6, noise in any::<bool>()
    ) {
        let (data, labels) = labeled_instance(seed, n, d, c, noise);
        let fast = silhouette(data.view(), &labels).unwrap();
        let (overall, per_point) = brute_silhouette(data.view(), &labels);
        prop_assert!((fast.overall - overall).abs() <= 1e-12, "{} vs {}", fast.overall, overall);
        for (a, b) in fast.per_point.iter().zip(&per_point) {
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "noise mismatch"),
            }
        }
    }

    #[test]
    fn silhouette_invariant_to_relabel_and_translation(
        seed in any::<u64>(), n in 4usize..=80, shift in -50.0f64..50.0
    ) {
        let (data, labels) = labeled_instance(seed, n, 2, 4, true);
        let base = silhouette(data.view(), &labels).unwrap();
        let relabeled: Vec<Option<usize>> = labels.iter().map(|l| l.map(|v| 7 - v)).collect();
        let moved = &data + shift;
        let r = silhouette(data.view(), &relabeled).unwrap();
        let t = silhouette(moved.view(), &labels).unwrap();
        prop_assert!((base.overall - r.overall).abs() <= 1e-12);
        prop_assert!((base.overall - t.overall).abs() <= 1e-9);
        let weighted: f64 = base.per_cluster.iter().map(|c| c.silhouette * c.size as f64).sum::<f64>()
            / base.per_cluster.iter().map(|c| c.size).sum::<usize>() as f64;
        prop_assert!((weighted - base.overall).abs() <= 1e-12);
        prop_assert!(base.per_point.iter().flatten().all(|s| (-1.0..=1.0).contains(s)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn type1_objective_never_increases(
        seed in any::<u64>(), n in 8usize..=120, d in 1usize..=4, c in 2usize..=5, m in 1.2f64..3.5
    ) {
        let (data, init) = fcm_instance(seed, n, d, c);
        let cfg = FcmConfig { clusters: c, fuzzifier: m, max_iter: 200, epsilon: 1e-6, ..Default::default() };
        let p = fcm_type1_with_init(data.view(), &cfg, init).unwrap();
        for w in p.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "J rose from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn membership_columns_are_normalized(
        seed in any::<u64>(), n in 8usize..=100, c in 2usize..=5, spread in 0.0f64..0.3
    ) {
        let (data, init) = fcm_instance(seed, n, 3, c);
        let cfg = FcmConfig { clusters: c, spread, ..Default::default() };
        let t1 = fcm_type1_with_init(data.view(), &cfg, init.clone()).unwrap();
        for s in t1.u.sum_axis(Axis(0)) {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
        prop_assert!(t1.u.iter().all(|v| (0.0..=1.0).contains(v)));
        let t2 = fcm_type2_with_init(data.view(), &cfg, init).unwrap();
        let mid = (&t2.u_lower + &t2.u_upper) / 2.0;
        for s in mid.sum_axis(Axis(0)) {
            prop_assert!((s - 1.0).abs() <= 2.0 * c as f64 * spread + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn bounds_ordered_at_every_iteration(
        seed in any::<u64>(), n in 8usize..=120, c in 2usize..=5, spread in 0.0f64..0.49, fuzz in any::<bool>()
    ) {
        let (data, init) = fcm_instance(seed, n, 2, c);
        let cfg = FcmConfig { clusters: c, spread, centers_use_fuzzifier: fuzz, ..Default::default() };
        let mut violations = 0usize;
        let mut iterations = 0usize;
        let p = fcm_type2_observed(data.view(), &cfg, init, |s| {
            iterations += 1;
            violations += s
                .u_lower
                .iter()
                .zip(s.u_upper.iter())
                .filter(|(&l, &u)| !(0.0 <= l && l <= u && u <= 1.0))
                .count();
        })
        .unwrap();
        prop_assert_eq!(iterations, p.iterations_run);
        prop_assert_eq!(violations, 0);
    }

    #[test]
    fn zero_spread_reproduces_type1_labels(
        seed in any::<u64>(), n in 8usize..=120, d in 1usize..=4, c in 2usize..=5, m in 1.3f64..3.0
    ) {
        let (data, init) = fcm_instance(seed, n, d, c);
        let cfg = FcmConfig {
            clusters: c, fuzzifier: m, spread: 0.0, centers_use_fuzzifier: true, ..Default::default()
        };
        let t1 = fcm_type1_with_init(data.view(), &cfg, init.clone()).unwrap();
        let t2 = fcm_type2_with_init(data.view(), &cfg, init).unwrap();
        prop_assert_eq!(&t2.u_lower, &t2.u_upper);
        prop_assert_eq!(&t1.labels, &t2.labels);
    }

    #[test]
    fn permuting_initial_rows_permutes_clusters(seed in any::<u64>(), n in 8usize..=60, c in 2usize..=4) {
        let (data, init) = fcm_instance(seed, n, 2, c);
        let cfg = FcmConfig { clusters: c, ..Default::default() };
        let order: Vec<usize> = (0..c).rev().collect();
        let permuted = init.select(Axis(0), &order);
        let a = fcm_type2_with_init(data.view(), &cfg, init).unwrap();
        let b = fcm_type2_with_init(data.view(), &cfg, permuted).unwrap();
        let relabeled: Vec<usize> = b.labels.iter().map(|&l| order[l]).collect();
        prop_assert_eq!(canonical(&a.labels), canonical(&relabeled));
    }
}

#[test]
fn uniform_entropy_is_log_c() {
    for c in 2..=10usize {
        let labels: Vec<Option<usize>> = (0..c * 37).map(|i| Some(i % c)).collect();
        let e = assignment_entropy(&labels);
        assert!((e.entropy - (c as f64).ln()).abs() <= 1e-12, "c = {c}: {}", e.entropy);
        assert!((e.normalized - 1.0).abs() <= 1e-12);
    }
    let single = assignment_entropy(&vec![Some(4); 50]);
    assert_eq!(single.entropy, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn entropy_bounds_and_relabel(labels in prop::collection::vec(prop::option::weighted(0.9, 0usize..6), 1..100)) {
        let e = assignment_entropy(&labels);
        prop_assert!(e.entropy >= 0.0);
        prop_assert!(e.entropy <= (e.n_clusters.max(1) as f64).ln() + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&e.normalized));
        let relabeled: Vec<Option<usize>> = labels.iter().map(|l| l.map(|v| (v + 3) % 6)).collect();
        prop_assert!((assignment_entropy(&relabeled).entropy - e.entropy).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn dbscan_matches_reachability_oracle(
        seed in any::<u64>(), n in 1usize..=40, eps in 0.05f64..0.6, min_pts in 1usize..=6
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = uniform_matrix(&mut rng, n, 2, 1.0);
        let p = dbscan(data.view(), eps, min_pts);
        prop_assert_eq!(p.labels, dbscan_oracle(data.view(), eps, min_pts));
    }

    #[test]
    fn agglomerative_matches_naive_merging(seed in any::<u64>(), n in 1usize..=40, c_frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = uniform_matrix(&mut rng, n, 3, 1.0);
        let c = 1 + ((n - 1) as f64 * c_frac) as usize;
        for (l, o) in [
            (Linkage::Single, OracleLinkage::Single),
            (Linkage::Complete, OracleLinkage::Complete),
            (Linkage::Average, OracleLinkage::Average),
        ] {
            let got: Vec<usize> = agglomerative(data.view(), c, l).unwrap().labels.into_iter().map(Option::unwrap).collect();
            prop_assert_eq!(got, agglomerative_oracle(data.view(), c, o), "linkage {}", l);
        }
    }

    #[test]
    fn duplicating_a_core_point_never_splits(seed in any::<u64>(), n in 2usize..=40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = uniform_matrix(&mut rng, n, 2, 1.0);
        let (eps, min_pts) = (0.3, 3);
        let before = dbscan(data.view(), eps, min_pts);
        let core = (0..n).find(|&i| {
            (0..n).filter(|&j| fuzzex_core::matrix::euclidean(data.row(i), data.row(j)) <= eps).count() >= min_pts
        });
        if let Some(i) = core {
            let mut grown = data.clone();
            grown.push_row(data.row(i)).unwrap();
            let after = dbscan(grown.view(), eps, min_pts);
            for a in 0..n {
                for b in 0..n {
                    if before.labels[a].is_some() && before.labels[a] == before.labels[b] {
                        prop_assert_eq!(after.labels[a], after.labels[b]);
                    }
                }
            }
        }
    }
}
