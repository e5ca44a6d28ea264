//! Synthetic feature tables for experiments and tests.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{ClassLabel, FeatureTable};
use crate::error::{Error, Result};
use crate::rng;

/// Class sizes of the 829 four-rater nodules, malignancy ratings 1 to 5.
pub const NODULE_CLASS_COUNTS: [usize; 5] = [117, 85, 351, 166, 110];

/// One isotropic Gaussian component.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBlob {
    pub label: ClassLabel,
    pub count: usize,
    pub mean: Vec<f64>,
    pub std_dev: f64,
}

/// Samples every blob in order; feature names are `f0, f1, ...`.
pub fn gaussian_mixture(blobs: &[ClassBlob], seed: u64) -> Result<FeatureTable> {
    let p = blobs.first().map_or(0, |b| b.mean.len());
    if p == 0 {
        return Err(Error::NoFeatures);
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, blob) in blobs.iter().enumerate() {
        if blob.mean.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: blob.mean.len(),
            });
        }
        let noise = Normal::new(0.0, blob.std_dev)
            .map_err(|e| Error::Config(format!("blob {i}: {e}")))?;
        let mut rng = rng::stream(seed, &[i as u64]);
        for _ in 0..blob.count {
            values.extend(blob.mean.iter().map(|m| m + noise.sample(&mut rng)));
            labels.push(blob.label);
        }
    }
    let features = Array2::from_shape_vec((labels.len(), p), values)
        .map_err(|e| Error::InvalidTable(e.to_string()))?;
    FeatureTable::new(features, labels, feature_names(p))
}

pub fn feature_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("f{j}")).collect()
}

/// Classes `1..=counts.len()` with unit-variance noise whose means step by
/// `separation` along the first `informative` features; the remaining
/// features are pure noise. Neighboring classes overlap when `separation`
/// is small, the way adjacent ordinal ratings do.
pub fn ordinal_mixture(
    counts: &[usize],
    p: usize,
    informative: usize,
    separation: f64,
    seed: u64,
) -> Result<FeatureTable> {
    let blobs: Vec<ClassBlob> = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| ClassBlob {
            label: i as ClassLabel + 1,
            count,
            mean: (0..p)
                .map(|j| if j < informative { i as f64 * separation } else { 0.0 })
                .collect(),
            std_dev: 1.0,
        })
        .collect();
    gaussian_mixture(&blobs, seed)
}

/// Appends `count` rows of `class` drawn around `center`.
pub fn inject_outliers(
    table: &FeatureTable,
    class: ClassLabel,
    count: usize,
    center: &[f64],
    std_dev: f64,
    seed: u64,
) -> Result<FeatureTable> {
    if center.len() != table.n_features() {
        return Err(Error::DimensionMismatch {
            expected: table.n_features(),
            actual: center.len(),
        });
    }
    let noise = Normal::new(0.0, std_dev).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = rng::stream(seed, &[u64::from(class), 0x4f55_544c]);
    let values: Vec<f64> = (0..count)
        .flat_map(|_| center.iter().map(|c| c + noise.sample(&mut rng)).collect::<Vec<_>>())
        .collect();
    let extra = Array2::from_shape_vec((count, center.len()), values)
        .map_err(|e| Error::InvalidTable(e.to_string()))?;
    table.append(extra.view(), &vec![class; count])
}

/// Uniform features in `[0, 1)` with uniform labels in `1..=n_classes`.
/// With `levels`, values are rounded to that many distinct steps so distance
/// ties are common.
pub fn uniform_table(n: usize, p: usize, n_classes: ClassLabel, levels: Option<u32>, seed: u64) -> Result<FeatureTable> {
    let mut rng = rng::stream(seed, &[]);
    let values: Vec<f64> = (0..n * p)
        .map(|_| {
            let v: f64 = rng.random();
            match levels {
                Some(l) => (v * f64::from(l)).floor(),
                None => v,
            }
        })
        .collect();
    let labels: Vec<ClassLabel> = (0..n).map(|_| rng.random_range(1..=n_classes)).collect();
    let features = Array2::from_shape_vec((n, p), values).map_err(|e| Error::InvalidTable(e.to_string()))?;
    FeatureTable::with_classes(features, labels, feature_names(p), n_classes)
}

/// Uniform random features with exactly `counts[c - 1]` rows of class `c`.
pub fn uniform_with_counts(counts: &[usize], p: usize, seed: u64) -> Result<FeatureTable> {
    let mut rng = rng::stream(seed, &[]);
    let labels: Vec<ClassLabel> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i as ClassLabel + 1, n))
        .collect();
    let values: Vec<f64> = (0..labels.len() * p).map(|_| rng.random()).collect();
    let features =
        Array2::from_shape_vec((labels.len(), p), values).map_err(|e| Error::InvalidTable(e.to_string()))?;
    FeatureTable::new(features, labels, feature_names(p))
}
