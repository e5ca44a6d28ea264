use rand::Rng;

use super::{
    class_members, draw_lambda, per_class, single_member_batch, BalancePlan, ClassBatch, Method, SamplerConfig,
    SyntheticBatch,
};
use crate::error::Result;
use crate::neighbors::NeighborIndex;

/// Density weights `r_i / sum(r)` with `r_i = H_i / k`; uniform when every `H_i` is zero.
pub fn ratio_weights(out_of_class: &[usize], k: usize) -> Vec<f64> {
    let ratios: Vec<f64> = out_of_class.iter().map(|&h| h as f64 / k as f64).collect();
    let total: f64 = ratios.iter().sum();
    if total > 0.0 {
        ratios.iter().map(|r| r / total).collect()
    } else {
        vec![1.0 / out_of_class.len() as f64; out_of_class.len()]
    }
}

/// Density weights of `rows` from their all-class `k` nearest neighbors.
pub fn adasyn_weights(rows: &[usize], index: &NeighborIndex<'_>, k: usize) -> Result<Vec<f64>> {
    let h = rows
        .iter()
        .map(|&r| index.knn_all(r, k).map(|ns| ns.out_of_class))
        .collect::<Result<Vec<_>>>()?;
    Ok(ratio_weights(&h, k))
}

/// Integer split of a quota across weighted parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    /// `floor(weight_i * quota)`.
    pub base: Vec<usize>,
    /// Final counts; sums to the quota.
    pub counts: Vec<usize>,
}

/// Floors `weight_i * quota`, then hands the residual out one at a time in
/// descending weight order (ties to the lower position).
pub fn allocate_counts(weights: &[f64], quota: usize) -> Allocation {
    let base: Vec<usize> = weights
        .iter()
        .map(|w| (w * quota as f64).floor().max(0.0) as usize)
        .collect();
    let mut counts = base.clone();
    let assigned: usize = base.iter().sum();
    if weights.is_empty() {
        return Allocation { base, counts };
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    // floors never sum past the quota, so the residual is nonnegative
    for &i in order.iter().cycle().take(quota.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    Allocation { base, counts }
}

/// ADASYN: per-parent synthetic counts proportional to the fraction of
/// out-of-class neighbors, interpolated toward within-class neighbors.
pub fn adasyn(index: &NeighborIndex<'_>, plan: &BalancePlan, cfg: &SamplerConfig) -> Result<SyntheticBatch> {
    let table = index.table();
    let p = table.n_features();
    per_class(table, plan, cfg, |class, quota, rng| {
        let members = class_members(table, class)?;
        if members.len() == 1 {
            return single_member_batch(table, class, members[0], quota, cfg);
        }
        let weights = adasyn_weights(&members, index, cfg.k)?;
        let alloc = allocate_counts(&weights, quota);
        let mut batch = ClassBatch::new(class, quota, p);
        for (&parent, &count) in members.iter().zip(&alloc.counts) {
            if count == 0 {
                continue;
            }
            let neighbors: Vec<usize> = index.knn_within(parent, cfg.k, class)?.rows().collect();
            for _ in 0..count {
                let neighbor = neighbors[rng.random_range(0..neighbors.len())];
                let lambda = draw_lambda(rng, p, cfg.lambda_mode, 1.0);
                batch.push_interpolated(Method::Adasyn, table, parent, neighbor, lambda);
            }
        }
        Ok(batch)
    })
}
