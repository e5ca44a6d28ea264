use std::collections::HashMap;

use log::warn;
use rand::Rng;
use serde::Serialize;

use super::smote::interpolate_within;
use super::{
    class_members, draw_lambda, parent_schedule, per_class, single_member_batch, BalancePlan, ClassBatch, Method,
    SamplerConfig, SyntheticBatch,
};
use crate::data::ClassLabel;
use crate::error::Result;
use crate::neighbors::{NeighborIndex, NeighborSet};
use crate::rng::StreamRng;

/// Position of a minority instance relative to the class boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DangerLabel {
    Safe,
    Danger,
    Noise,
}

/// Noise when every neighbor is out of class, Danger when at least half are,
/// Safe otherwise.
pub fn assign_danger(neighbors: &NeighborSet, k: usize) -> DangerLabel {
    let h = neighbors.out_of_class;
    if h >= k {
        DangerLabel::Noise
    } else if 2 * h >= k {
        DangerLabel::Danger
    } else {
        DangerLabel::Safe
    }
}

/// Borderline-SMOTE 1: SMOTE restricted to Danger parents.
pub fn borderline1(index: &NeighborIndex<'_>, plan: &BalancePlan, cfg: &SamplerConfig) -> Result<SyntheticBatch> {
    borderline(index, plan, cfg, Method::Borderline1)
}

/// Borderline-SMOTE 2: Danger parents interpolated toward any of their
/// nearest neighbors; out-of-class neighbors use a reduced lambda range.
pub fn borderline2(index: &NeighborIndex<'_>, plan: &BalancePlan, cfg: &SamplerConfig) -> Result<SyntheticBatch> {
    borderline(index, plan, cfg, Method::Borderline2)
}

fn borderline(
    index: &NeighborIndex<'_>,
    plan: &BalancePlan,
    cfg: &SamplerConfig,
    method: Method,
) -> Result<SyntheticBatch> {
    let table = index.table();
    per_class(table, plan, cfg, |class, quota, rng| {
        let members = class_members(table, class)?;
        if members.len() == 1 {
            return single_member_batch(table, class, members[0], quota, cfg);
        }
        let mut danger = Vec::new();
        let mut all_neighbors = HashMap::new();
        for &row in &members {
            let ns = index.knn_all(row, cfg.k)?;
            if assign_danger(&ns, cfg.k) == DangerLabel::Danger {
                danger.push(row);
                all_neighbors.insert(row, ns);
            }
        }
        if danger.is_empty() {
            warn!("class {class} has no Danger instances; falling back to SMOTE");
            return interpolate_within(index, class, quota, &members, cfg, rng, Method::Smote);
        }
        match method {
            Method::Borderline2 => toward_any_neighbor(index, class, quota, &danger, &all_neighbors, cfg, rng),
            _ => interpolate_within(index, class, quota, &danger, cfg, rng, method),
        }
    })
}

fn toward_any_neighbor(
    index: &NeighborIndex<'_>,
    class: ClassLabel,
    quota: usize,
    parents: &[usize],
    neighbors: &HashMap<usize, NeighborSet>,
    cfg: &SamplerConfig,
    rng: &mut StreamRng,
) -> Result<ClassBatch> {
    let table = index.table();
    let p = table.n_features();
    let mut batch = ClassBatch::new(class, quota, p);
    for parent in parent_schedule(parents, quota, rng) {
        let ns = &neighbors[&parent];
        let chosen = ns.neighbors[rng.random_range(0..ns.len())];
        let max = if chosen.class == class {
            1.0
        } else {
            cfg.b2_out_of_class_lambda_max
        };
        let lambda = draw_lambda(rng, p, cfg.lambda_mode, max);
        batch.push_interpolated(Method::Borderline2, table, parent, chosen.row, lambda);
    }
    Ok(batch)
}
