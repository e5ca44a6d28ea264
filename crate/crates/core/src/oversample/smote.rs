use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rand::Rng;

use super::{
    class_members, draw_lambda, interpolate, parent_schedule, per_class, single_member_batch, BalancePlan, ClassBatch, Method,
    SamplerConfig, SyntheticBatch,
};
use crate::data::ClassLabel;
use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;
use crate::rng::StreamRng;

/// `s + lambda * (a - s)`, feature by feature, clamped to the segment between `s` and `a`.
pub fn smote_interpolate(s: &[f64], a: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    if a.len() != s.len() || lambda.len() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            actual: if a.len() != s.len() { a.len() } else { lambda.len() },
        });
    }
    Ok(s.iter()
        .zip(a)
        .zip(lambda)
        .map(|((&s, &a), &l)| interpolate(s, a, l))
        .collect())
}

/// SMOTE: interpolation toward a random within-class nearest neighbor.
pub fn smote(index: &NeighborIndex<'_>, plan: &BalancePlan, cfg: &SamplerConfig) -> Result<SyntheticBatch> {
    let table = index.table();
    per_class(table, plan, cfg, |class, quota, rng| {
        let members = class_members(table, class)?;
        if members.len() == 1 {
            return single_member_batch(table, class, members[0], quota, cfg);
        }
        interpolate_within(index, class, quota, &members, cfg, rng, Method::Smote)
    })
}

/// Generates `quota` synthetics for `class` from `parents`, each interpolated
/// toward a uniformly chosen within-class neighbor of its parent.
pub(super) fn interpolate_within(
    index: &NeighborIndex<'_>,
    class: ClassLabel,
    quota: usize,
    parents: &[usize],
    cfg: &SamplerConfig,
    rng: &mut StreamRng,
    method: Method,
) -> Result<ClassBatch> {
    let table = index.table();
    let p = table.n_features();
    let schedule = parent_schedule(parents, quota, rng);
    let mut batch = ClassBatch::new(class, quota, p);
    let mut cache: HashMap<usize, Vec<usize>> = HashMap::new();
    for parent in schedule {
        let neighbors = match cache.entry(parent) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(index.knn_within(parent, cfg.k, class)?.rows().collect()),
        };
        let neighbor = neighbors[rng.random_range(0..neighbors.len())];
        let lambda = draw_lambda(rng, p, cfg.lambda_mode, 1.0);
        batch.push_interpolated(method, table, parent, neighbor, lambda);
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{partition, FeatureTable};
    use crate::oversample::{plan_balance, LambdaMode};
    use ndarray::array;

    #[test]
    fn interpolation_arithmetic() {
        let s = [0.0, 10.0];
        let a = [4.0, 20.0];
        assert_eq!(smote_interpolate(&s, &a, &[0.0, 0.0]).unwrap(), s);
        assert_eq!(smote_interpolate(&s, &a, &[1.0, 1.0]).unwrap(), a);
        assert_eq!(smote_interpolate(&s, &a, &[0.5, 0.25]).unwrap(), [2.0, 12.5]);
        assert_eq!(smote_interpolate(&[0.1], &[0.3], &[1.0]).unwrap(), [0.3]);
        assert!(smote_interpolate(&s, &[1.0], &[0.5, 0.5]).is_err());
        assert!(smote_interpolate(&s, &a, &[0.5]).is_err());
    }

    fn two_member_table() -> FeatureTable {
        FeatureTable::new(
            array![
                [1.0, 8.0],
                [3.0, -2.0],
                [0.0, 0.0],
                [5.0, 5.0],
                [9.0, 9.0],
                [7.0, 1.0]
            ],
            vec![1, 1, 2, 2, 2, 2],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn two_member_class_stays_in_the_box() {
        let t = two_member_table();
        let plan = plan_balance(&partition(&t).unwrap());
        let idx = NeighborIndex::build(&t, true);
        for mode in [LambdaMode::PerFeature, LambdaMode::PerSample] {
            let cfg = SamplerConfig::new(Method::Smote, 11).with_lambda_mode(mode);
            let batch = smote(&idx, &plan, &cfg).unwrap();
            assert_eq!(batch.len(), 2);
            for i in 0..batch.len() {
                let x = batch.row(i);
                assert!((1.0..=3.0).contains(&x[0]));
                assert!((-2.0..=8.0).contains(&x[1]));
                assert_eq!(batch.labels()[i], 1);
            }
        }
    }

    #[test]
    fn per_sample_lambda_is_shared() {
        let t = two_member_table();
        let plan = plan_balance(&partition(&t).unwrap());
        let idx = NeighborIndex::build(&t, true);
        let cfg = SamplerConfig::new(Method::Smote, 2).with_lambda_mode(LambdaMode::PerSample);
        let batch = smote(&idx, &plan, &cfg).unwrap();
        for prov in batch.provenance() {
            let l = prov.lambda.as_ref().unwrap();
            assert_eq!(l[0], l[1]);
        }
    }

    #[test]
    fn single_member_class_needs_fallback() {
        let t = FeatureTable::new(
            array![[1.0], [0.0], [0.5], [0.7]],
            vec![1, 2, 2, 2],
            vec!["a".into()],
        )
        .unwrap();
        let plan = plan_balance(&partition(&t).unwrap());
        let idx = NeighborIndex::build(&t, true);
        let mut cfg = SamplerConfig::new(Method::Smote, 0);
        assert!(matches!(smote(&idx, &plan, &cfg), Err(Error::SingleMemberClass(1))));
        cfg.single_member_fallback = true;
        let batch = smote(&idx, &plan, &cfg).unwrap();
        assert_eq!(batch.len(), 2);
        assert!(batch.provenance().iter().all(|p| p.method == Method::Random && p.parent == 0));
    }
}
