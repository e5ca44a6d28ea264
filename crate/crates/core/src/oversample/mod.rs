//! Rebalancing by oversampling.
//!
//! Every sampler raises each minority class to the majority count. Synthetic
//! samplers interpolate between a minority parent `s` and a neighbor `a`:
//!
//! ```text
//! synthetic[p] = s[p] + lambda[p] * (a[p] - s[p]),   lambda[p] ~ U[0, 1)
//! ```
//!
//! Each class is generated from its own RNG stream derived from the seed and
//! the class label, so output does not depend on scheduling.

mod adasyn;
mod borderline;
mod random;
mod smote;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{partition, ClassLabel, ClassPartition, FeatureTable};
use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;
use crate::rng::{self, StreamRng};

pub use adasyn::{adasyn, adasyn_weights, allocate_counts, ratio_weights, Allocation};
pub use borderline::{assign_danger, borderline1, borderline2, DangerLabel};
pub use random::random_oversample;
pub use smote::{smote, smote_interpolate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "smote")]
    Smote,
    #[serde(rename = "b1")]
    Borderline1,
    #[serde(rename = "b2")]
    Borderline2,
    #[serde(rename = "adasyn")]
    Adasyn,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Smote,
        Method::Borderline1,
        Method::Borderline2,
        Method::Adasyn,
        Method::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Smote => "smote",
            Method::Borderline1 => "b1",
            Method::Borderline2 => "b2",
            Method::Adasyn => "adasyn",
        }
    }

    /// True for the interpolating samplers (everything except random duplication).
    pub fn is_synthetic(self) -> bool {
        self != Method::Random
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(Method::Random),
            "smote" => Ok(Method::Smote),
            "b1" | "borderline1" | "borderline-1" => Ok(Method::Borderline1),
            "b2" | "borderline2" | "borderline-2" => Ok(Method::Borderline2),
            "adasyn" => Ok(Method::Adasyn),
            _ => Err(Error::UnknownMethod(s.to_string())),
        }
    }
}

/// How interpolation weights are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// An independent weight per feature.
    #[default]
    PerFeature,
    /// One weight shared by every feature of a synthetic instance.
    PerSample,
}

impl FromStr for LambdaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "per_feature" => Ok(LambdaMode::PerFeature),
            "per_sample" => Ok(LambdaMode::PerSample),
            _ => Err(Error::Config(format!("unknown lambda mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub method: Method,
    /// Neighbor count used both for interpolation and for the danger/density tests.
    pub k: usize,
    pub seed: u64,
    pub lambda_mode: LambdaMode,
    /// Upper bound (exclusive) of lambda when Borderline-2 interpolates toward
    /// an out-of-class neighbor.
    pub b2_out_of_class_lambda_max: f64,
    /// Duplicate single-instance classes instead of failing.
    pub single_member_fallback: bool,
    /// Min-max scale features before neighbor search.
    pub scale: bool,
}

impl SamplerConfig {
    pub fn new(method: Method, seed: u64) -> Self {
        Self {
            method,
            k: 5,
            seed,
            lambda_mode: LambdaMode::PerFeature,
            b2_out_of_class_lambda_max: 0.5,
            single_member_fallback: false,
            scale: true,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_lambda_mode(mut self, mode: LambdaMode) -> Self {
        self.lambda_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::ZeroK);
        }
        let max = self.b2_out_of_class_lambda_max;
        if !(max > 0.0 && max <= 1.0) {
            return Err(Error::Config(format!(
                "b2_out_of_class_lambda_max must be in (0, 1], got {max}"
            )));
        }
        Ok(())
    }
}

/// Number of synthetic instances each class needs to reach the majority count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalancePlan {
    quotas: BTreeMap<ClassLabel, usize>,
    majority_class: ClassLabel,
    majority_count: usize,
}

impl BalancePlan {
    /// Quota of `class`; zero for the majority class and for classes with no rows.
    pub fn quota(&self, class: ClassLabel) -> usize {
        self.quotas.get(&class).copied().unwrap_or(0)
    }

    /// Quotas of every non-empty class, keyed by label.
    pub fn quotas(&self) -> &BTreeMap<ClassLabel, usize> {
        &self.quotas
    }

    pub fn total(&self) -> usize {
        self.quotas.values().sum()
    }

    pub fn majority_class(&self) -> ClassLabel {
        self.majority_class
    }

    pub fn majority_count(&self) -> usize {
        self.majority_count
    }
}

/// Quotas `majority_count - class_count` for every class that has rows.
pub fn plan_balance(part: &ClassPartition) -> BalancePlan {
    let majority_count = part.majority_count();
    let quotas = part
        .present_classes()
        .map(|c| (c, majority_count - part.count(c)))
        .collect();
    BalancePlan {
        quotas,
        majority_class: part.majority_class(),
        majority_count,
    }
}

/// Where a synthetic instance came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub method: Method,
    /// Row of the minority parent in the source table.
    pub parent: usize,
    /// Row interpolated toward; `None` for duplicates.
    pub neighbor: Option<usize>,
    /// Interpolation weights per feature; `None` for duplicates.
    pub lambda: Option<Vec<f64>>,
}

/// Synthetic instances generated for one table, in ascending class order.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBatch {
    features: Array2<f64>,
    labels: Vec<ClassLabel>,
    provenance: Vec<Provenance>,
}

impl SyntheticBatch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.features.ncols();
        &self.features.as_slice().expect("standard layout")[i * p..(i + 1) * p]
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn count(&self, class: ClassLabel) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// The source table with the synthetic rows appended.
    pub fn append_to(&self, table: &FeatureTable) -> Result<FeatureTable> {
        table.append(self.features.view(), &self.labels)
    }

    fn from_parts(p: usize, parts: Vec<ClassBatch>) -> Self {
        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut provenance = Vec::new();
        for part in parts {
            values.extend(part.values);
            labels.extend(std::iter::repeat_n(part.class, part.provenance.len()));
            provenance.extend(part.provenance);
        }
        let features = Array2::from_shape_vec((labels.len(), p), values)
            .expect("every synthetic row has p values");
        Self {
            features,
            labels,
            provenance,
        }
    }
}

/// Synthetic rows for a single class.
struct ClassBatch {
    class: ClassLabel,
    values: Vec<f64>,
    provenance: Vec<Provenance>,
}

impl ClassBatch {
    fn new(class: ClassLabel, quota: usize, p: usize) -> Self {
        Self {
            class,
            values: Vec::with_capacity(quota * p),
            provenance: Vec::with_capacity(quota),
        }
    }

    fn push_duplicate(&mut self, table: &FeatureTable, parent: usize) {
        self.values.extend_from_slice(table.row(parent));
        self.provenance.push(Provenance {
            method: Method::Random,
            parent,
            neighbor: None,
            lambda: None,
        });
    }

    fn push_interpolated(
        &mut self,
        method: Method,
        table: &FeatureTable,
        parent: usize,
        neighbor: usize,
        lambda: Vec<f64>,
    ) {
        let s = table.row(parent);
        let a = table.row(neighbor);
        self.values
            .extend(s.iter().zip(a).zip(&lambda).map(|((&s, &a), &l)| interpolate(s, a, l)));
        self.provenance.push(Provenance {
            method,
            parent,
            neighbor: Some(neighbor),
            lambda: Some(lambda),
        });
    }
}

/// Runs the configured sampler on the table behind `index`.
pub fn oversample(index: &NeighborIndex<'_>, plan: &BalancePlan, cfg: &SamplerConfig) -> Result<SyntheticBatch> {
    match cfg.method {
        Method::Random => random_oversample(index.table(), plan, cfg),
        Method::Smote => smote(index, plan, cfg),
        Method::Borderline1 => borderline1(index, plan, cfg),
        Method::Borderline2 => borderline2(index, plan, cfg),
        Method::Adasyn => adasyn(index, plan, cfg),
    }
}

/// Plans, indexes and oversamples `table` in one call.
pub fn resample(table: &FeatureTable, cfg: &SamplerConfig) -> Result<SyntheticBatch> {
    let plan = plan_balance(&partition(table)?);
    let index = NeighborIndex::build(table, cfg.scale);
    oversample(&index, &plan, cfg)
}

/// Runs `generate` for every class with a positive quota, each with its own
/// RNG stream, and concatenates the results in label order.
fn per_class<F>(table: &FeatureTable, plan: &BalancePlan, cfg: &SamplerConfig, generate: F) -> Result<SyntheticBatch>
where
    F: Fn(ClassLabel, usize, &mut StreamRng) -> Result<ClassBatch> + Sync,
{
    cfg.validate()?;
    let work: Vec<(ClassLabel, usize)> = plan
        .quotas()
        .iter()
        .filter(|(_, &q)| q > 0)
        .map(|(&c, &q)| (c, q))
        .collect();
    let parts = work
        .par_iter()
        .map(|&(class, quota)| {
            let mut rng = rng::stream(cfg.seed, &[rng::TAG_CLASS, u64::from(class)]);
            generate(class, quota, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticBatch::from_parts(table.n_features(), parts))
}

/// Rows of `class` that can serve as parents; fails on empty classes.
fn class_members(table: &FeatureTable, class: ClassLabel) -> Result<Vec<usize>> {
    let rows: Vec<usize> = (0..table.n_rows()).filter(|&r| table.label(r) == class).collect();
    if rows.is_empty() {
        return Err(Error::EmptyClass(class));
    }
    Ok(rows)
}

/// Random duplication for single-instance classes when allowed, else an error.
fn single_member_batch(
    table: &FeatureTable,
    class: ClassLabel,
    member: usize,
    quota: usize,
    cfg: &SamplerConfig,
) -> Result<ClassBatch> {
    if !cfg.single_member_fallback {
        return Err(Error::SingleMemberClass(class));
    }
    log::warn!("class {class} has a single instance; duplicating it {quota} times");
    let mut batch = ClassBatch::new(class, quota, table.n_features());
    for _ in 0..quota {
        batch.push_duplicate(table, member);
    }
    Ok(batch)
}

/// Parent order for `quota` synthetics: full passes over `parents` starting at
/// a random offset, then a uniform sample without replacement for the rest.
fn parent_schedule(parents: &[usize], quota: usize, rng: &mut StreamRng) -> Vec<usize> {
    let n = parents.len();
    let mut schedule = Vec::with_capacity(quota);
    let start = rng.random_range(0..n);
    for _ in 0..quota / n {
        schedule.extend((0..n).map(|i| parents[(start + i) % n]));
    }
    let mut rest = rand::seq::index::sample(rng, n, quota % n).into_vec();
    rest.sort_unstable();
    schedule.extend(rest.into_iter().map(|i| parents[i]));
    schedule
}

/// `s + lambda * (a - s)`, kept inside `[min(s, a), max(s, a)]` despite rounding.
fn interpolate(s: f64, a: f64, lambda: f64) -> f64 {
    (s + lambda * (a - s)).clamp(s.min(a), s.max(a))
}

fn draw_lambda(rng: &mut StreamRng, p: usize, mode: LambdaMode, max: f64) -> Vec<f64> {
    match mode {
        LambdaMode::PerFeature => (0..p).map(|_| rng.random::<f64>() * max).collect(),
        LambdaMode::PerSample => vec![rng.random::<f64>() * max; p],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn table_one_plan() {
        let part = ClassPartition::from_counts(&[117, 85, 351, 166, 110]).unwrap();
        let plan = plan_balance(&part);
        let quotas: Vec<usize> = plan.quotas().values().copied().collect();
        assert_eq!(quotas, [234, 266, 0, 185, 241]);
        assert_eq!(plan.majority_class(), 3);
        for c in 1..=5 {
            assert_eq!(part.count(c) + plan.quota(c), 351);
        }
    }

    #[test]
    fn balanced_and_two_class_plans() {
        let plan = plan_balance(&ClassPartition::from_counts(&[4, 4, 4]).unwrap());
        assert_eq!(plan.total(), 0);
        let plan = plan_balance(&ClassPartition::from_counts(&[1, 99]).unwrap());
        assert_eq!(plan.quota(1), 98);
        assert_eq!(plan.quota(2), 0);
    }

    #[test]
    fn empty_classes_get_no_quota() {
        let plan = plan_balance(&ClassPartition::from_counts(&[2, 0, 5]).unwrap());
        assert_eq!(plan.quotas().keys().copied().collect::<Vec<_>>(), [1, 3]);
        assert_eq!(plan.quota(2), 0);
    }

    #[test]
    fn schedule_cycles_then_samples_distinct() {
        let parents = [10, 11, 12, 13];
        let mut rng = StreamRng::seed_from_u64(3);
        let s = parent_schedule(&parents, 11, &mut rng);
        assert_eq!(s.len(), 11);
        for p in parents {
            let n = s.iter().filter(|&&x| x == p).count();
            assert!(n == 2 || n == 3);
        }
        let tail = &s[8..];
        assert!(tail[0] != tail[1] && tail[1] != tail[2] && tail[0] != tail[2]);
    }

    #[test]
    fn interpolation_never_leaves_the_segment() {
        assert_eq!(interpolate(0.1, 0.3, 1.0), 0.3);
        assert_eq!(interpolate(0.3, 0.1, 1.0), 0.1);
        assert_eq!(interpolate(0.1, 0.3, 0.0), 0.1);
        let x = interpolate(-800.0, 125.0, 0.999_999_999_999_999_9);
        assert!((-800.0..=125.0).contains(&x));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("smite".parse::<Method>(), Err(Error::UnknownMethod(_))));
        assert_eq!("per-sample".parse::<LambdaMode>().unwrap(), LambdaMode::PerSample);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SamplerConfig::new(Method::Smote, 1);
        assert!(cfg.validate().is_ok());
        cfg.b2_out_of_class_lambda_max = 0.0;
        assert!(cfg.validate().is_err());
        cfg.b2_out_of_class_lambda_max = 0.5;
        cfg.k = 0;
        assert!(cfg.validate().is_err());
    }
}
