use rand::Rng;

use super::{class_members, per_class, BalancePlan, ClassBatch, SamplerConfig};
use crate::data::FeatureTable;
use crate::error::Result;

/// Exact duplicates drawn uniformly with replacement from each minority class.
pub fn random_oversample(table: &FeatureTable, plan: &BalancePlan, cfg: &SamplerConfig) -> Result<super::SyntheticBatch> {
    per_class(table, plan, cfg, |class, quota, rng| {
        let members = class_members(table, class)?;
        let mut batch = ClassBatch::new(class, quota, table.n_features());
        for _ in 0..quota {
            let parent = members[rng.random_range(0..members.len())];
            batch.push_duplicate(table, parent);
        }
        Ok(batch)
    })
}
