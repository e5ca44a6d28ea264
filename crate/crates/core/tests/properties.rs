use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use synthsample::datasets::uniform_table;
use synthsample::divergence::{build_histogram, equal_width_edges, js_divergence, js_similarity, Histogram};
use synthsample::forest::{train_forest, ForestParams};
use synthsample::oversample::{allocate_counts, resample, LambdaMode, Method, SamplerConfig};
use synthsample::{aggregate_rating, partition, RatingSet};

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

fn mass(bins: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, bins).prop_map(|mut v| {
        let total: f64 = v.iter().sum();
        if total == 0.0 {
            v[0] = 1.0;
        } else {
            v.iter_mut().for_each(|x| *x /= total);
        }
        v
    })
}

fn hist(m: Vec<f64>) -> Histogram {
    let edges = (0..=m.len()).map(|i| i as f64).collect();
    Histogram::from_mass(edges, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aggregation_is_in_range_and_order_free(r in prop::array::uniform4(1i64..=5), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let label = aggregate_rating(&RatingSet::new(r).unwrap());
        prop_assert!((1..=5).contains(&label));
        let shuffled = [r[perm[0]], r[perm[1]], r[perm[2]], r[perm[3]]];
        prop_assert_eq!(label, aggregate_rating(&RatingSet::new(shuffled).unwrap()));
        // a strict majority always wins
        let top = (1..=5).find(|v| r.iter().filter(|x| *x == v).count() >= 3);
        if let Some(v) = top {
            prop_assert_eq!(i64::from(label), v);
        }
    }

    #[test]
    fn js_is_symmetric_and_bounded((p, q) in (2usize..40).prop_flat_map(|b| (mass(b), mass(b)))) {
        let (hp, hq) = (hist(p), hist(q));
        let d = js_divergence(&hp, &hq).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, js_divergence(&hq, &hp).unwrap());
        assert_abs_diff_eq!(js_divergence(&hp, &hp).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn js_similarity_obeys_triangle_inequality((p, q, r) in (2usize..30).prop_flat_map(|b| (mass(b), mass(b), mass(b)))) {
        let (hp, hq, hr) = (hist(p), hist(q), hist(r));
        let pq = js_similarity(&hp, &hq).unwrap();
        let qr = js_similarity(&hq, &hr).unwrap();
        let pr = js_similarity(&hp, &hr).unwrap();
        prop_assert!(pr <= pq + qr + 1e-9);
    }

    #[test]
    fn histograms_keep_every_value(values in prop::collection::vec(-5.0f64..5.0, 1..200), bins in 2usize..60) {
        let edges = equal_width_edges(-2.0, 2.0, bins).unwrap();
        let h = build_histogram(&values, &edges).unwrap();
        assert_abs_diff_eq!(h.mass().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn allocation_meets_the_quota(weights in prop::collection::vec(0.0f64..1.0, 1..80), quota in 0usize..5000) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 0.0);
        let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
        let a = allocate_counts(&w, quota);
        prop_assert_eq!(a.counts.iter().sum::<usize>(), quota);
        for ((&c, &b), &wi) in a.counts.iter().zip(&a.base).zip(&w) {
            prop_assert!(c >= b && c <= b + 1);
            prop_assert!((b as f64 - wi * quota as f64).abs() < 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn resampling_balances_and_is_deterministic(
        m in method(),
        n in 20usize..120,
        p in 1usize..8,
        seed in any::<u64>(),
        per_sample in any::<bool>(),
    ) {
        let table = uniform_table(n, p, 3, None, seed).unwrap();
        let part = partition(&table).unwrap();
        prop_assume!(part.present_classes().all(|c| part.count(c) >= 2));
        let mode = if per_sample { LambdaMode::PerSample } else { LambdaMode::PerFeature };
        let cfg = SamplerConfig::new(m, seed).with_lambda_mode(mode);
        let batch = resample(&table, &cfg).unwrap();
        prop_assert_eq!(&batch, &resample(&table, &cfg).unwrap());

        let after = partition(&batch.append_to(&table).unwrap()).unwrap();
        let majority = part.majority_count();
        for c in part.present_classes() {
            prop_assert_eq!(after.count(c), majority);
        }
        for (i, prov) in batch.provenance().iter().enumerate() {
            prop_assert_eq!(table.label(prov.parent), batch.labels()[i]);
            if let Some(lambda) = &prov.lambda {
                prop_assert!(lambda.iter().all(|l| (0.0..1.0).contains(l)));
                if mode == LambdaMode::PerSample {
                    prop_assert!(lambda.iter().all(|l| *l == lambda[0]));
                }
            }
        }
    }

    #[test]
    fn forest_votes_cover_every_tree(n in 20usize..80, p in 1usize..6, trees in 1usize..15, seed in any::<u64>()) {
        let table = uniform_table(n, p, 3, Some(4), seed).unwrap();
        prop_assume!(partition(&table).unwrap().present_classes().count() >= 2);
        let forest = train_forest(&table, &ForestParams::default().with_trees(trees), seed).unwrap();
        for r in 0..n {
            let votes = forest.votes(table.row(r));
            prop_assert_eq!(votes.iter().sum::<usize>(), trees);
            // majority vote, ties to the lowest label; independent of tree order
            let best = votes.iter().max().unwrap();
            let expected = votes.iter().position(|v| v == best).unwrap() as u32 + 1;
            prop_assert_eq!(forest.predict(table.row(r)).unwrap(), expected);
            let mut per_tree: Vec<u32> = forest.trees().iter().map(|t| t.predict(table.row(r))).collect();
            per_tree.reverse();
            let mut recount = vec![0usize; votes.len()];
            for label in per_tree {
                recount[label as usize - 1] += 1;
            }
            prop_assert_eq!(&recount, &votes);
        }
    }
}
