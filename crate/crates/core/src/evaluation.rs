//! Stratified repeated hold-out evaluation.
//!
//! Each repeat splits the table per class, oversamples the training part
//! only, trains a forest on it and scores the untouched test part. Split,
//! sampler and forest seeds are derived from the experiment seed and the
//! repeat index, so every method sees the same test partitions.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{partition, ClassLabel, FeatureTable};
use crate::error::{Error, Result};
use crate::forest::{train_forest, ForestParams};
use crate::neighbors::NeighborIndex;
use crate::oversample::{oversample, plan_balance, Method, SamplerConfig};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            train_fraction: 0.7,
            repeats: 30,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        Ok(())
    }
}

/// Row indices of one hold-out split, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per class, `round(fraction * n)` rows (at least one, at most `n - 1`) go
/// to training and the rest to test.
pub fn stratified_split(table: &FeatureTable, spec: &SplitSpec, repeat: usize) -> Result<Split> {
    spec.validate()?;
    let part = partition(table)?;
    let mut rng = rng::stream(spec.seed, &[rng::TAG_SPLIT, repeat as u64]);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in part.present_classes() {
        let mut rows = part.members(class).to_vec();
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewInstances {
                class,
                count: n,
                required: 2,
            });
        }
        rows.shuffle(&mut rng);
        let n_train = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&rows[..n_train]);
        test.extend_from_slice(&rows[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Rows are true classes, columns predicted classes, both indexed by `label - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: ClassLabel) -> Self {
        let n = n_classes as usize;
        Self {
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_predictions(n_classes: ClassLabel, truth: &[ClassLabel], predicted: &[ClassLabel]) -> Self {
        let mut m = Self::new(n_classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            m.record(t, p);
        }
        m
    }

    pub fn record(&mut self, truth: ClassLabel, predicted: ClassLabel) {
        self.counts[truth as usize - 1][predicted as usize - 1] += 1;
    }

    pub fn get(&self, truth: ClassLabel, predicted: ClassLabel) -> usize {
        self.counts[truth as usize - 1][predicted as usize - 1]
    }

    pub fn class_total(&self, class: ClassLabel) -> usize {
        self.counts
            .get(class as usize - 1)
            .map_or(0, |row| row.iter().sum())
    }

    pub fn trace(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Overall accuracy in percent.
    pub fn accuracy(&self) -> f64 {
        100.0 * self.trace() as f64 / self.total() as f64
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.counts
    }
}

/// Percentage of `class` test rows predicted as `class`.
pub fn sensitivity(confusion: &ConfusionMatrix, class: ClassLabel) -> Result<f64> {
    let total = if class == 0 { 0 } else { confusion.class_total(class) };
    if total == 0 {
        return Err(Error::ClassAbsent(class));
    }
    Ok(100.0 * confusion.get(class, class) as f64 / total as f64)
}

/// Outcome of one hold-out repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub train_size: usize,
    pub synthetic_size: usize,
    /// Test rows, as indices of the evaluated table.
    pub test_rows: Vec<usize>,
    /// Original rows used as parents or neighbors of synthetic instances.
    pub synthetic_sources: Vec<usize>,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub sensitivity: BTreeMap<ClassLabel, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// `none` for the baseline without oversampling.
    pub method: String,
    pub split: SplitSpec,
    pub sampler: Option<SamplerConfig>,
    pub forest: ForestParams,
    /// Mean per-class sensitivity over repeats, in percent.
    pub sensitivity: BTreeMap<ClassLabel, f64>,
    /// Mean overall accuracy over repeats, in percent.
    pub overall_accuracy: f64,
    pub repeats: Vec<RepeatRecord>,
}

pub const BASELINE: &str = "none";

/// Runs every repeat for one sampler (or none) and averages the metrics.
pub fn run_experiment(
    table: &FeatureTable,
    spec: &SplitSpec,
    sampler: Option<&SamplerConfig>,
    forest: &ForestParams,
) -> Result<ExperimentReport> {
    spec.validate()?;
    if let Some(cfg) = sampler {
        cfg.validate()?;
    }
    let repeats = (0..spec.repeats)
        .into_par_iter()
        .map(|r| run_repeat(table, spec, sampler, forest, r))
        .collect::<Result<Vec<_>>>()?;

    let n = repeats.len() as f64;
    let mut sensitivity = BTreeMap::new();
    for rec in &repeats {
        for (&c, &s) in &rec.sensitivity {
            *sensitivity.entry(c).or_insert(0.0) += s / n;
        }
    }
    let overall_accuracy = repeats.iter().map(|r| r.accuracy).sum::<f64>() / n;
    let method = sampler.map_or(BASELINE.to_string(), |c| c.method.to_string());
    log::info!("{method}: {} repeats, mean accuracy {overall_accuracy:.2}%", repeats.len());
    Ok(ExperimentReport {
        method,
        split: spec.clone(),
        sampler: sampler.cloned(),
        forest: forest.clone(),
        sensitivity,
        overall_accuracy,
        repeats,
    })
}

/// One split / oversample / train / score cycle.
pub fn run_repeat(
    table: &FeatureTable,
    spec: &SplitSpec,
    sampler: Option<&SamplerConfig>,
    forest: &ForestParams,
    repeat: usize,
) -> Result<RepeatRecord> {
    let split = stratified_split(table, spec, repeat)?;
    let train = table.subset(&split.train);

    let (fit_table, synthetic_size, mut synthetic_sources) = match sampler {
        None => (train, 0, Vec::new()),
        Some(cfg) => {
            let mut cfg = cfg.clone();
            cfg.seed = rng::derive_seed(cfg.seed, &[rng::TAG_SAMPLER, repeat as u64]);
            let plan = plan_balance(&partition(&train)?);
            let index = NeighborIndex::build(&train, cfg.scale);
            let batch = oversample(&index, &plan, &cfg)?;
            let sources: Vec<usize> = batch
                .provenance()
                .iter()
                .flat_map(|p| std::iter::once(p.parent).chain(p.neighbor))
                .map(|i| split.train[i])
                .collect();
            (batch.append_to(&train)?, batch.len(), sources)
        }
    };
    synthetic_sources.sort_unstable();
    synthetic_sources.dedup();

    let forest_seed = rng::derive_seed(spec.seed, &[rng::TAG_FOREST, repeat as u64]);
    let model = train_forest(&fit_table, forest, forest_seed)?;
    let test = table.subset(&split.test);
    let predicted = model.predict_table(&test)?;
    let confusion = ConfusionMatrix::from_predictions(table.n_classes(), test.labels(), &predicted);
    let sensitivity = partition(&test)?
        .present_classes()
        .map(|c| sensitivity(&confusion, c).map(|s| (c, s)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    Ok(RepeatRecord {
        repeat,
        train_size: split.train.len(),
        synthetic_size,
        test_rows: split.test,
        synthetic_sources,
        accuracy: confusion.accuracy(),
        confusion,
        sensitivity,
    })
}

/// Reports for several methods over the same splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reports: Vec<ExperimentReport>,
    /// Per class, mean over the interpolating samplers of
    /// (method sensitivity - baseline sensitivity), in percentage points.
    /// Present only when the baseline and at least one such sampler ran.
    pub avg_increase: Option<BTreeMap<ClassLabel, f64>>,
}

/// Runs the baseline (`None`) and/or each sampler with shared settings.
pub fn compare_methods(
    table: &FeatureTable,
    spec: &SplitSpec,
    methods: &[Option<Method>],
    sampler: &SamplerConfig,
    forest: &ForestParams,
) -> Result<Comparison> {
    let reports = methods
        .iter()
        .map(|m| {
            let cfg = m.map(|method| SamplerConfig {
                method,
                ..sampler.clone()
            });
            run_experiment(table, spec, cfg.as_ref(), forest)
        })
        .collect::<Result<Vec<_>>>()?;
    let avg_increase = average_increase(&reports);
    Ok(Comparison {
        reports,
        avg_increase,
    })
}

fn average_increase(reports: &[ExperimentReport]) -> Option<BTreeMap<ClassLabel, f64>> {
    let baseline = reports.iter().find(|r| r.sampler.is_none())?;
    let synthetic: Vec<&ExperimentReport> = reports
        .iter()
        .filter(|r| r.sampler.as_ref().is_some_and(|c| c.method.is_synthetic()))
        .collect();
    if synthetic.is_empty() {
        return None;
    }
    Some(
        baseline
            .sensitivity
            .iter()
            .map(|(&c, &base)| {
                let total: f64 = synthetic
                    .iter()
                    .map(|r| r.sensitivity.get(&c).copied().unwrap_or(0.0) - base)
                    .sum();
                (c, total / synthetic.len() as f64)
            })
            .collect(),
    )
}

impl Comparison {
    pub fn report(&self, method: &str) -> Option<&ExperimentReport> {
        self.reports.iter().find(|r| r.method == method)
    }

    fn classes(&self) -> Vec<ClassLabel> {
        let mut classes: Vec<ClassLabel> = self
            .reports
            .iter()
            .flat_map(|r| r.sensitivity.keys().copied())
            .collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }

    /// Per-class sensitivity by method, plus the average-increase column.
    pub fn write_sensitivity_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["class".to_string()];
        header.extend(self.reports.iter().map(|r| r.method.clone()));
        if self.avg_increase.is_some() {
            header.push("avg_increase".into());
        }
        wtr.write_record(&header)?;
        for class in self.classes() {
            let mut rec = vec![class.to_string()];
            rec.extend(
                self.reports
                    .iter()
                    .map(|r| r.sensitivity.get(&class).map_or(String::new(), |s| s.to_string())),
            );
            if let Some(inc) = &self.avg_increase {
                rec.push(inc.get(&class).map_or(String::new(), |s| s.to_string()));
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// `method,overall_accuracy` rows.
    pub fn write_accuracy_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["method", "overall_accuracy"])?;
        for r in &self.reports {
            wtr.write_record([r.method.clone(), r.overall_accuracy.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// One row per (method, repeat, class).
    pub fn write_repeats_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "method",
            "repeat",
            "class",
            "test_count",
            "correct",
            "sensitivity",
            "accuracy",
        ])?;
        for r in &self.reports {
            for rec in &r.repeats {
                for (&c, &s) in &rec.sensitivity {
                    wtr.write_record([
                        r.method.clone(),
                        rec.repeat.to_string(),
                        c.to_string(),
                        rec.confusion.class_total(c).to_string(),
                        rec.confusion.get(c, c).to_string(),
                        s.to_string(),
                        rec.accuracy.to_string(),
                    ])?;
                }
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}
