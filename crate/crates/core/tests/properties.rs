//! Property tests: readers never panic, round-trips are exact, and the
//! metrics behave under the transformations they are supposed to be
//! invariant (or equivariant) to.

mod common;

use std::collections::BTreeMap;
use std::io::Write;

use common::*;
use embedgap::{
    adjacency_pairs, density, distribution_gap, diversity, filtered_gap, histogram,
    lda_to_sigmoid, posterior_gda, posterior_sigmoid, read_binary, read_csv, sample_subset,
    select, write_binary, AdjacencyPairs, DiversityConfig, FeatureSet, GaussianModel, LdaParams,
    PerSampleGap, SelectionConfig, SelectionMode, SubsetScheme,
};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    /// Binary write∘read is the identity, bit for bit, ids included.
    #[test]
    fn binary_round_trip_is_identity(
        n in 1usize..20,
        d in 1usize..6,
        with_scores in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let ids: Vec<String> = (0..n).map(|i| format!("id-{seed:x}-{i}")).collect();
        let data: Vec<f64> = (0..n * d).map(|_| 1e3 * normal(&mut r)).collect();
        let scores = with_scores.then(|| (0..n).map(|_| r.random_range(0.0..=1.0)).collect());
        let set = FeatureSet::new(ids, d, data, scores).unwrap();

        let file = tempfile::NamedTempFile::new().unwrap();
        write_binary(&set, file.path()).unwrap();
        let back = read_binary(file.path()).unwrap();

        prop_assert_eq!(back.ids(), set.ids());
        prop_assert_eq!(back.dim(), set.dim());
        for i in 0..set.len() {
            for (a, b) in set.row(i).iter().zip(back.row(i)) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        match (set.scores(), back.scores()) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                for (x, y) in a.iter().zip(b) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
            _ => prop_assert!(false, "score presence changed"),
        }
    }

    /// Arbitrary bytes never panic the CSV reader; they parse or error.
    #[test]
    fn csv_reader_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(&bytes).unwrap();
        let _ = read_csv(file.path());
    }

    /// Arbitrary bytes never panic the binary reader.
    #[test]
    fn binary_reader_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(&bytes).unwrap();
        let _ = read_binary(file.path());
    }

    /// Arbitrary bytes never panic the grid-manifest reader.
    #[test]
    fn grid_reader_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(&bytes).unwrap();
        let _ = embedgap::read_grid_manifest(file.path());
    }

    /// Mahalanobis distances are unchanged when reference rows and the query
    /// are pushed through the same invertible linear map.
    #[test]
    fn whitening_invariance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = 3usize;
        let n = 40usize;
        let set = random_feature_set(&mut r, n, d, 1.0);
        let model = GaussianModel::fit(&set, 0.0).unwrap();
        prop_assume!(model.ridge() == 0.0);

        // diagonally dominant map, comfortably invertible
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = 0.4 * normal(&mut r) + if i == j { 3.0 } else { 0.0 };
            }
        }
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..d)
                .map(|i| (0..d).map(|j| a[i * d + j] * x[j]).sum())
                .collect()
        };
        let mapped_data: Vec<f64> = (0..n).flat_map(|i| apply(set.row(i))).collect();
        let mapped = FeatureSet::new(set.ids().to_vec(), d, mapped_data, None).unwrap();
        let mapped_model = GaussianModel::fit(&mapped, 0.0).unwrap();
        prop_assume!(mapped_model.ridge() == 0.0);

        for _ in 0..5 {
            let x: Vec<f64> = (0..d).map(|_| 2.0 * normal(&mut r)).collect();
            let m1 = model.mahalanobis_sq(&x).unwrap();
            let m2 = mapped_model.mahalanobis_sq(&apply(&x)).unwrap();
            prop_assert!((m1 - m2).abs() <= 1e-6 * m1.abs().max(1.0),
                "m1 {m1} vs m2 {m2}");
        }
    }

    /// A larger ridge never increases the squared distance.
    #[test]
    fn ridge_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = 3usize;
        let set = random_feature_set(&mut r, 30, d, 1.0);
        let small = GaussianModel::fit(&set, 1e-6).unwrap();
        let large = GaussianModel::fit(&set, 1e-2).unwrap();
        prop_assume!(small.ridge() == 1e-6 && large.ridge() == 1e-2);
        for _ in 0..5 {
            let x: Vec<f64> = (0..d).map(|_| 3.0 * normal(&mut r)).collect();
            let a = small.mahalanobis_sq(&x).unwrap();
            let b = large.mahalanobis_sq(&x).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-9) + 1e-12, "ridge raised distance: {a} -> {b}");
        }
    }

    /// Scaling the priors together changes neither posterior.
    #[test]
    fn prior_scaling_invariance(seed in any::<u64>(), scale in 1e-3..1e3f64) {
        let mut r = rng(seed);
        let d = r.random_range(1..=4);
        let cov = random_spd(&mut r, d, 0.4);
        let mu0: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
        let mu1: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
        let b0 = r.random_range(0.1..5.0f64);
        let b1 = r.random_range(0.1..5.0f64);
        let lda = LdaParams::new(mu0.clone(), mu1.clone(), cov.clone(), b0, b1).unwrap();
        let scaled = LdaParams::new(mu0, mu1, cov, b0 * scale, b1 * scale).unwrap();
        let x: Vec<f64> = (0..d).map(|_| 2.0 * normal(&mut r)).collect();
        let p = posterior_gda(&lda, &x).unwrap();
        let q = posterior_gda(&scaled, &x).unwrap();
        prop_assert!((p - q).abs() <= 1e-12);
        let ps = posterior_sigmoid(&lda_to_sigmoid(&lda).unwrap(), &x).unwrap();
        let qs = posterior_sigmoid(&lda_to_sigmoid(&scaled).unwrap(), &x).unwrap();
        prop_assert!((ps - qs).abs() <= 1e-12);
    }

    /// The sigmoid posterior increases strictly along the weight direction.
    #[test]
    fn posterior_monotone_along_w(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.random_range(1..=4);
        let cov = random_spd(&mut r, d, 0.4);
        let mu0: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
        let mut mu1 = mu0.clone();
        mu1[0] += 1.0; // distinct means so w is nonzero
        let lda = LdaParams::new(mu0, mu1, cov, 1.0, 1.0).unwrap();
        let clf = lda_to_sigmoid(&lda).unwrap();
        let x: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
        let mut last = -1.0;
        for step in 0..6 {
            let t = step as f64 * 0.7;
            let shifted: Vec<f64> = x.iter().zip(&clf.w).map(|(v, w)| v + t * w).collect();
            let p = posterior_sigmoid(&clf, &shifted).unwrap();
            prop_assert!(p > last, "posterior not increasing: {last} -> {p}");
            last = p;
        }
    }

    /// Scaling test offsets by s multiplies the distribution gap by s².
    #[test]
    fn gap_scales_quadratically(seed in any::<u64>(), s in 0.1..4.0f64) {
        let mut r = rng(seed);
        let d = r.random_range(1..=4);
        let mean: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
        let cov = random_spd(&mut r, d, 0.3);
        let model = GaussianModel::from_parts(mean.clone(), cov, 0.0).unwrap();
        let n = r.random_range(1..=40);
        let test = random_feature_set(&mut r, n, d, 1.5);
        let scaled_rows: Vec<f64> = test
            .rows()
            .flat_map(|row| {
                row.iter()
                    .zip(&mean)
                    .map(|(x, m)| m + s * (x - m))
                    .collect::<Vec<_>>()
            })
            .collect();
        let scaled = FeatureSet::new(test.ids().to_vec(), d, scaled_rows, None).unwrap();
        let g1 = distribution_gap(&model, &test).unwrap();
        let g2 = distribution_gap(&model, &scaled).unwrap();
        prop_assert!((g2 - s * s * g1).abs() <= 1e-9 * (s * s * g1).abs().max(1e-12),
            "gap {g1} scaled to {g2}, expected {}", s * s * g1);
    }

    /// Density ignores pair orientation and pair-list order.
    #[test]
    fn density_orientation_and_permutation_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=12);
        let pool = random_feature_set(&mut r, n, 3, 1.0);
        let mut pairs = Vec::new();
        for i in 0..n - 1 {
            pairs.push((format!("s{i}"), format!("s{}", i + 1)));
        }
        let base = density(&pool, &AdjacencyPairs::from_pairs(pairs.clone()).unwrap()).unwrap();

        // flip a deterministic subset of orientations and rotate the list
        let mut flipped: Vec<(String, String)> = pairs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                if k % 2 == 0 {
                    (b.clone(), a.clone())
                } else {
                    (a.clone(), b.clone())
                }
            })
            .collect();
        let rot = flipped.len() / 2;
        flipped.rotate_left(rot);
        let variant = density(&pool, &AdjacencyPairs::from_pairs(flipped).unwrap()).unwrap();
        prop_assert!((base - variant).abs() <= 1e-12 * base.abs().max(1.0));
    }

    /// Diversity is unchanged when all rows shift by a constant vector.
    #[test]
    fn diversity_translation_invariant(seed in any::<u64>(), shift in -50.0..50.0f64) {
        let mut r = rng(seed);
        let d = r.random_range(1..=4);
        let n = r.random_range(2..=30);
        let pool = random_feature_set(&mut r, n, d, 1.0);
        let offset: Vec<f64> = (0..d).map(|i| shift + i as f64).collect();
        let shifted_rows: Vec<f64> = pool
            .rows()
            .flat_map(|row| row.iter().zip(&offset).map(|(x, o)| x + o).collect::<Vec<_>>())
            .collect();
        let shifted = FeatureSet::new(pool.ids().to_vec(), d, shifted_rows, None).unwrap();
        let cfg = DiversityConfig::default();
        let a = diversity(&pool, &cfg).unwrap();
        let b = diversity(&shifted, &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12), "{a} vs {b}");
    }

    /// Subset sizes are the product of kept-value counts, exactly.
    #[test]
    fn subset_counts_multiply(seed in any::<u64>()) {
        let mut r = rng(seed);
        let grid = random_grid(&mut r, 4, 5, 400, true);
        let mut keep = BTreeMap::new();
        let mut expected = 1usize;
        for p in grid.parameters() {
            let total = p.values.len();
            if r.random_range(0..2) == 0 {
                let k = r.random_range(1..=total);
                // keep a deterministic prefix of size k
                keep.insert(p.name.clone(), p.values[..k].to_vec());
                expected *= k;
            } else {
                expected *= total;
            }
        }
        let scheme = SubsetScheme { name: "random".into(), keep };
        let ids = sample_subset(&grid, &scheme).unwrap();
        prop_assert_eq!(ids.len(), expected);
    }

    /// Adjacency counts match the closed form, angular flags included.
    #[test]
    fn adjacency_count_closed_form_with_angular(seed in any::<u64>()) {
        let mut r = rng(seed);
        let grid = random_grid(&mut r, 4, 6, 300, true);
        let pairs = adjacency_pairs(&grid);
        prop_assert_eq!(pairs.len(), closed_form_pair_count(&grid));
        let enumerated = enumerate_adjacent_pairs(&grid);
        prop_assert_eq!(pair_set(pairs.pairs()), pair_set(&enumerated));
    }

    /// Histogram counts always sum to n, whatever the range.
    #[test]
    fn histogram_counts_sum_to_n(
        seed in any::<u64>(),
        bins in 1usize..12,
        explicit_range in any::<bool>(),
    ) {
        let mut r = rng(seed);
        let n = r.random_range(1..=50);
        let per_sample: Vec<PerSampleGap> = (0..n)
            .map(|i| PerSampleGap {
                id: format!("s{i}"),
                mahalanobis_sq: r.random_range(0.0..30.0f64),
            })
            .collect();
        let range = explicit_range.then_some((1.0, 3.5));
        let h = histogram(&per_sample, bins, range).unwrap();
        let total: usize = h.bins.iter().map(|b| b.count).sum();
        prop_assert_eq!(total, n);
        if !explicit_range {
            prop_assert_eq!(h.clamped_low + h.clamped_high, 0);
        }
    }

    /// Filtered gaps are nondecreasing in the kept fraction.
    #[test]
    fn filtered_gap_nondecreasing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.random_range(1..=3);
        let mean: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
        let cov = random_spd(&mut r, d, 0.3);
        let model = GaussianModel::from_parts(mean, cov, 0.0).unwrap();
        let n = r.random_range(1..=25);
        let test = random_feature_set(&mut r, n, d, 1.5);
        let mut last = 0.0;
        for step in 1..=10 {
            let g = filtered_gap(&model, &test, step as f64 / 10.0).unwrap();
            prop_assert!(g + 1e-15 >= last);
            last = g;
        }
    }

    /// Selection output is a deterministic function of inputs and seed.
    #[test]
    fn selection_deterministic(seed in any::<u64>(), count in 1usize..8) {
        let items: Vec<PerSampleGap> = (0..10)
            .map(|i| PerSampleGap { id: format!("i{i}"), mahalanobis_sq: i as f64 })
            .collect();
        for mode in [SelectionMode::GapWeighted, SelectionMode::UniformRandom] {
            let cfg = SelectionConfig { count, mode, temperature: 1.5, seed };
            let a = select(&items, &cfg).unwrap();
            let b = select(&items, &cfg).unwrap();
            prop_assert_eq!(&a, &b);
            let unique: std::collections::HashSet<&String> = a.iter().collect();
            prop_assert_eq!(unique.len(), count);
        }
    }
}
