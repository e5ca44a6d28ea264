//! Jensen-Shannon comparison of per-class feature distributions.
//!
//! For each minority class and each feature, the values before and after
//! resampling are binned on shared equal-width edges and compared with the
//! JS similarity, the square root of the base-2 JS divergence. Despite the
//! name, larger values mean the distributions are further apart.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{partition, ClassLabel, FeatureTable};
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 50;

/// Normalized histogram over fixed edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

impl Histogram {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    /// Builds a histogram directly from a probability vector. Mainly for tests.
    pub fn from_mass(edges: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        check_edges(&edges)?;
        if mass.len() + 1 != edges.len() {
            return Err(Error::InvalidEdges(format!(
                "{} edges for {} bins",
                edges.len(),
                mass.len()
            )));
        }
        Ok(Self { edges, mass })
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidEdges("need at least two edges".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidEdges("edges must be finite".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidEdges("edges must be strictly ascending".into()));
    }
    Ok(())
}

/// `bins + 1` equally spaced edges from `min` to `max` (both included exactly).
pub fn equal_width_edges(min: f64, max: f64, bins: usize) -> Result<Vec<f64>> {
    if bins == 0 || max.partial_cmp(&min) != Some(Ordering::Greater) {
        return Err(Error::InvalidEdges(format!(
            "cannot split [{min}, {max}] into {bins} bins"
        )));
    }
    let width = max - min;
    let mut edges: Vec<f64> = (0..=bins)
        .map(|i| min + width * (i as f64 / bins as f64))
        .collect();
    edges[bins] = max;
    check_edges(&edges)?;
    Ok(edges)
}

/// Bins are half-open `[lo, hi)` except the last, which is closed; values
/// outside the edges are clamped into the end bins.
pub fn build_histogram(values: &[f64], edges: &[f64]) -> Result<Histogram> {
    check_edges(edges)?;
    if values.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let bin = edges.partition_point(|&e| e <= v).clamp(1, bins) - 1;
        counts[bin] += 1;
    }
    let n = values.len() as f64;
    Ok(Histogram {
        edges: edges.to_vec(),
        mass: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// Base-2 Jensen-Shannon divergence, in `[0, 1]`.
pub fn js_divergence(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.edges != q.edges || p.mass.len() != q.mass.len() {
        return Err(Error::EdgeMismatch);
    }
    let half_kl = |a: f64, m: f64| if a > 0.0 { 0.5 * a * (a / m).log2() } else { 0.0 };
    let jsd: f64 = p
        .mass
        .iter()
        .zip(&q.mass)
        .map(|(&a, &b)| {
            let m = 0.5 * (a + b);
            half_kl(a, m) + half_kl(b, m)
        })
        .sum();
    Ok(jsd.clamp(0.0, 1.0))
}

/// Square root of [`js_divergence`]; a metric on distributions.
pub fn js_similarity(p: &Histogram, q: &Histogram) -> Result<f64> {
    js_divergence(p, q).map(f64::sqrt)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureDivergence {
    pub feature: String,
    pub feature_index: usize,
    pub js_similarity: f64,
    /// 1 for the feature with the largest similarity within its class.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDivergence {
    pub class: ClassLabel,
    pub mean: f64,
    /// In feature column order.
    pub features: Vec<FeatureDivergence>,
}

impl ClassDivergence {
    /// Features sorted by descending similarity.
    pub fn ranking(&self) -> Vec<&FeatureDivergence> {
        let mut v: Vec<&FeatureDivergence> = self.features.iter().collect();
        v.sort_by_key(|f| f.rank);
        v
    }
}

/// Histograms behind one report entry; `None` when the feature is constant
/// across both tables for that class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramPair {
    pub class: ClassLabel,
    pub feature: String,
    pub original: Option<Histogram>,
    pub resampled: Option<Histogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub bins: usize,
    /// Minority classes of the original table, ascending.
    pub classes: Vec<ClassDivergence>,
    /// Mean over all (class, feature) entries.
    pub overall_mean: f64,
    pub mean_of_class_means: f64,
    #[serde(skip)]
    pub histograms: Vec<HistogramPair>,
}

impl DivergenceReport {
    pub fn class(&self, class: ClassLabel) -> Option<&ClassDivergence> {
        self.classes.iter().find(|c| c.class == class)
    }

    pub fn entry(&self, class: ClassLabel, feature: usize) -> Option<f64> {
        self.class(class)
            .and_then(|c| c.features.get(feature))
            .map(|f| f.js_similarity)
    }

    pub fn n_entries(&self) -> usize {
        self.classes.iter().map(|c| c.features.len()).sum()
    }

    /// Rows `class,feature,js_similarity,rank`, ranked within each class.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["class", "feature", "js_similarity", "rank"])?;
        for class in &self.classes {
            for f in class.ranking() {
                wtr.write_record([
                    class.class.to_string(),
                    f.feature.clone(),
                    f.js_similarity.to_string(),
                    f.rank.to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    /// Long-format histogram dump:
    /// `class,feature,bin,lower,upper,original_mass,resampled_mass`.
    pub fn write_histograms_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "class",
            "feature",
            "bin",
            "lower",
            "upper",
            "original_mass",
            "resampled_mass",
        ])?;
        for pair in &self.histograms {
            let (Some(orig), Some(res)) = (&pair.original, &pair.resampled) else {
                continue;
            };
            for (b, w) in orig.edges().windows(2).enumerate() {
                wtr.write_record([
                    pair.class.to_string(),
                    pair.feature.clone(),
                    b.to_string(),
                    w[0].to_string(),
                    w[1].to_string(),
                    orig.mass()[b].to_string(),
                    res.mass()[b].to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_histograms_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.histograms)?;
        Ok(())
    }
}

/// Compares every minority class of `original` feature by feature with the
/// same class in `resampled`. The majority class of `original` is skipped.
pub fn audit(original: &FeatureTable, resampled: &FeatureTable, bins: usize) -> Result<DivergenceReport> {
    if original.feature_names() != resampled.feature_names() {
        return Err(Error::FeatureMismatch);
    }
    if bins < 2 {
        return Err(Error::Config(format!("bins must be at least 2, got {bins}")));
    }
    let orig_part = partition(original)?;
    let res_part = partition(resampled)?;
    let top = orig_part.n_classes().max(res_part.n_classes());
    for c in 1..=top {
        if (orig_part.count(c) > 0) != (res_part.count(c) > 0) {
            return Err(Error::ClassMismatch(c));
        }
    }
    let majority = orig_part.majority_class();
    let minority: Vec<ClassLabel> = orig_part.present_classes().filter(|&c| c != majority).collect();
    let p = original.n_features();

    let cells: Vec<(ClassLabel, usize)> = minority
        .iter()
        .flat_map(|&c| (0..p).map(move |f| (c, f)))
        .collect();
    let computed = cells
        .par_iter()
        .map(|&(class, f)| compare_feature(original, resampled, class, f, bins))
        .collect::<Result<Vec<_>>>()?;

    let names = original.feature_names();
    let mut classes = Vec::with_capacity(minority.len());
    let mut histograms = Vec::with_capacity(cells.len());
    for (ci, &class) in minority.iter().enumerate() {
        let slice = &computed[ci * p..(ci + 1) * p];
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| slice[b].0.total_cmp(&slice[a].0).then(a.cmp(&b)));
        let mut rank = vec![0; p];
        for (pos, &f) in order.iter().enumerate() {
            rank[f] = pos + 1;
        }
        let features: Vec<FeatureDivergence> = (0..p)
            .map(|f| FeatureDivergence {
                feature: names[f].clone(),
                feature_index: f,
                js_similarity: slice[f].0,
                rank: rank[f],
            })
            .collect();
        let mean = features.iter().map(|f| f.js_similarity).sum::<f64>() / p as f64;
        classes.push(ClassDivergence {
            class,
            mean,
            features,
        });
        for (f, (_, orig, res)) in slice.iter().enumerate() {
            histograms.push(HistogramPair {
                class,
                feature: names[f].clone(),
                original: orig.clone(),
                resampled: res.clone(),
            });
        }
    }

    let n_entries = computed.len();
    let overall_mean = if n_entries == 0 {
        0.0
    } else {
        computed.iter().map(|c| c.0).sum::<f64>() / n_entries as f64
    };
    let mean_of_class_means = if classes.is_empty() {
        0.0
    } else {
        classes.iter().map(|c| c.mean).sum::<f64>() / classes.len() as f64
    };
    Ok(DivergenceReport {
        bins,
        classes,
        overall_mean,
        mean_of_class_means,
        histograms,
    })
}

type Comparison = (f64, Option<Histogram>, Option<Histogram>);

fn compare_feature(
    original: &FeatureTable,
    resampled: &FeatureTable,
    class: ClassLabel,
    feature: usize,
    bins: usize,
) -> Result<Comparison> {
    let a = original.class_feature_values(class, feature);
    let b = resampled.class_feature_values(class, feature);
    let (lo, hi) = a
        .iter()
        .chain(&b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi.partial_cmp(&lo) != Some(Ordering::Greater) {
        // same point mass on both sides
        return Ok((0.0, None, None));
    }
    let edges = equal_width_edges(lo, hi, bins)?;
    let ha = build_histogram(&a, &edges)?;
    let hb = build_histogram(&b, &edges)?;
    Ok((js_similarity(&ha, &hb)?, Some(ha), Some(hb)))
}
