//! Feature tables, CSV ingestion, class partitioning and rating aggregation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{Error, Result};

/// Class labels are positive integers.
pub type ClassLabel = u32;

/// Dense numeric feature matrix with one integer class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    features: Array2<f64>,
    labels: Vec<ClassLabel>,
    feature_names: Vec<String>,
    n_classes: ClassLabel,
}

impl FeatureTable {
    /// Builds a validated table; the number of classes is the largest label.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<ClassLabel>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n_classes = labels.iter().copied().max().unwrap_or(0);
        Self::with_classes(features, labels, feature_names, n_classes)
    }

    /// Builds a validated table with a declared class count `L`; labels must lie in `1..=L`.
    pub fn with_classes(
        features: Array2<f64>,
        labels: Vec<ClassLabel>,
        feature_names: Vec<String>,
        n_classes: ClassLabel,
    ) -> Result<Self> {
        if features.ncols() == 0 || feature_names.is_empty() {
            return Err(Error::NoFeatures);
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::InvalidTable(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if features.nrows() != labels.len() {
            return Err(Error::InvalidTable(format!(
                "{} rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some((row, &label)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l == 0 || l > n_classes)
        {
            return Err(Error::InvalidTable(format!(
                "row {row}: label {label} outside 1..={n_classes}"
            )));
        }
        if let Some(((row, col), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                row,
                column: feature_names[col].clone(),
            });
        }
        let features = if features.is_standard_layout() {
            features
        } else {
            features.as_standard_layout().into_owned()
        };
        Ok(Self {
            features,
            labels,
            feature_names,
            n_classes,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Declared (or inferred) number of classes `L`.
    pub fn n_classes(&self) -> ClassLabel {
        self.n_classes
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> ClassLabel {
        self.labels[row]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Feature vector of `row` as a contiguous slice.
    pub fn row(&self, row: usize) -> &[f64] {
        let p = self.n_features();
        let all = self
            .features
            .as_slice()
            .expect("feature matrix is kept in standard layout");
        &all[row * p..(row + 1) * p]
    }

    /// Values of one feature restricted to rows of `class`.
    pub fn class_feature_values(&self, class: ClassLabel, feature: usize) -> Vec<f64> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| self.features[[i, feature]])
            .collect()
    }

    /// New table made of the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> FeatureTable {
        FeatureTable {
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            feature_names: self.feature_names.clone(),
            n_classes: self.n_classes,
        }
    }

    /// This table followed by extra rows.
    pub fn append(&self, features: ArrayView2<'_, f64>, labels: &[ClassLabel]) -> Result<FeatureTable> {
        if features.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: features.ncols(),
            });
        }
        let stacked = ndarray::concatenate(Axis(0), &[self.features.view(), features])
            .map_err(|e| Error::InvalidTable(e.to_string()))?;
        let mut all_labels = self.labels.clone();
        all_labels.extend_from_slice(labels);
        FeatureTable::with_classes(
            stacked,
            all_labels,
            self.feature_names.clone(),
            self.n_classes,
        )
    }
}

/// Options for [`load_csv_with`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: String,
    /// Declared class count; inferred from the largest label when `None`.
    pub n_classes: Option<ClassLabel>,
    /// Columns dropped before parsing (e.g. provenance columns of a resampled file).
    pub ignore_columns: Vec<String>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            n_classes: None,
            ignore_columns: Vec::new(),
        }
    }
}

/// Loads a header-first CSV file; every column other than `label_column` is a feature.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<FeatureTable> {
    load_csv_with(path, &CsvOptions::new(label_column))
}

pub fn load_csv_with(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, opts)
}

/// Parses CSV from any reader. Row numbers in errors count data rows from 1.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();

    let label_positions: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| *h == opts.label_column)
        .map(|(i, _)| i)
        .collect();
    let label_pos = match label_positions.as_slice() {
        [] => return Err(Error::MissingLabelColumn(opts.label_column.clone())),
        [pos] => *pos,
        _ => return Err(Error::DuplicateLabelColumn(opts.label_column.clone())),
    };
    let feature_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, h)| *i != label_pos && !opts.ignore_columns.iter().any(|c| c == h))
        .map(|(i, h)| (i, h.to_string()))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::NoFeatures);
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        for (col, name) in &feature_cols {
            let cell = record.get(*col).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row,
                column: name.clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column: name.clone(),
                });
            }
            values.push(v);
        }
        let cell = record.get(label_pos).unwrap_or("");
        labels.push(parse_label(cell, row, &opts.label_column, opts.n_classes)?);
    }

    let p = feature_cols.len();
    let features = Array2::from_shape_vec((labels.len(), p), values)
        .map_err(|e| Error::InvalidTable(e.to_string()))?;
    let names = feature_cols.into_iter().map(|(_, n)| n).collect();
    match opts.n_classes {
        Some(l) => FeatureTable::with_classes(features, labels, names, l),
        None => FeatureTable::new(features, labels, names),
    }
}

fn parse_label(cell: &str, row: usize, column: &str, max: Option<ClassLabel>) -> Result<ClassLabel> {
    let invalid = || Error::InvalidLabel {
        row,
        column: column.to_string(),
        value: cell.to_string(),
    };
    let value = match cell.parse::<i64>() {
        Ok(v) => v,
        // "3.0" is accepted as 3
        Err(_) => match cell.parse::<f64>() {
            Ok(f) if f.is_finite() && f.fract() == 0.0 => f as i64,
            _ => return Err(invalid()),
        },
    };
    if value < 1 || value > i64::from(u32::MAX) {
        return Err(invalid());
    }
    let label = value as ClassLabel;
    match max {
        Some(l) if label > l => Err(invalid()),
        _ => Ok(label),
    }
}

/// Writes features (in column order) followed by the label column.
pub fn write_csv<W: Write>(table: &FeatureTable, label_column: &str, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = table.feature_names().iter().map(String::as_str).collect();
    header.push(label_column);
    wtr.write_record(&header)?;
    for r in 0..table.n_rows() {
        let mut rec: Vec<String> = table.row(r).iter().map(|v| v.to_string()).collect();
        rec.push(table.label(r).to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Four radiologist ratings, each in `1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatingSet([u8; 4]);

impl RatingSet {
    pub fn new(ratings: [i64; 4]) -> Result<Self> {
        let mut out = [0u8; 4];
        for (slot, &r) in out.iter_mut().zip(ratings.iter()) {
            if !(1..=5).contains(&r) {
                return Err(Error::InvalidRating(r));
            }
            *slot = r as u8;
        }
        Ok(Self(out))
    }

    pub fn ratings(&self) -> [u8; 4] {
        self.0
    }
}

/// Unique mode of the ratings, or the ceiling of their mean when no single
/// value has the highest multiplicity.
pub fn aggregate_rating(ratings: &RatingSet) -> ClassLabel {
    let mut freq = [0u8; 6];
    for &r in &ratings.0 {
        freq[r as usize] += 1;
    }
    let top = *freq.iter().max().expect("non-empty");
    let mut modes = (1..=5).filter(|&v| freq[v] == top);
    let first = modes.next().expect("some rating attains the maximum");
    if modes.next().is_none() {
        return first as ClassLabel;
    }
    let sum: u32 = ratings.0.iter().map(|&r| u32::from(r)).sum();
    // ceil(sum / 4) in integers
    sum.div_ceil(4)
}

/// Row indices grouped by class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassPartition {
    /// `members[c - 1]` holds the rows of class `c`, ascending.
    members: Vec<Vec<usize>>,
    majority_class: ClassLabel,
}

impl ClassPartition {
    pub fn n_classes(&self) -> ClassLabel {
        self.members.len() as ClassLabel
    }

    pub fn members(&self, class: ClassLabel) -> &[usize] {
        class
            .checked_sub(1)
            .and_then(|i| self.members.get(i as usize))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn count(&self, class: ClassLabel) -> usize {
        self.members(class).len()
    }

    /// Counts for every class `1..=L`, zeros included, keyed by label.
    pub fn counts(&self) -> BTreeMap<ClassLabel, usize> {
        self.classes().map(|c| (c, self.count(c))).collect()
    }

    /// All labels `1..=L`.
    pub fn classes(&self) -> impl Iterator<Item = ClassLabel> + '_ {
        1..=self.n_classes()
    }

    /// Labels with at least one row.
    pub fn present_classes(&self) -> impl Iterator<Item = ClassLabel> + '_ {
        self.classes().filter(|&c| self.count(c) > 0)
    }

    /// Class with the largest count; ties go to the lowest label.
    pub fn majority_class(&self) -> ClassLabel {
        self.majority_class
    }

    pub fn majority_count(&self) -> usize {
        self.count(self.majority_class)
    }

    /// Builds a partition directly from per-class counts with rows numbered
    /// consecutively class by class. Useful for planning without data.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        let mut next = 0;
        let labels: Vec<ClassLabel> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(i as ClassLabel + 1, n))
            .collect();
        let members = counts
            .iter()
            .map(|&n| {
                let rows = (next..next + n).collect();
                next += n;
                rows
            })
            .collect();
        Self::build(members, &labels)
    }

    fn build(members: Vec<Vec<usize>>, labels: &[ClassLabel]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyTable);
        }
        let mut majority_class = 1;
        let mut best = 0;
        for (i, rows) in members.iter().enumerate() {
            if rows.len() > best {
                best = rows.len();
                majority_class = i as ClassLabel + 1;
            }
        }
        Ok(Self {
            members,
            majority_class,
        })
    }
}

pub fn partition(table: &FeatureTable) -> Result<ClassPartition> {
    let mut members = vec![Vec::new(); table.n_classes() as usize];
    for (row, &label) in table.labels().iter().enumerate() {
        members[label as usize - 1].push(row);
    }
    ClassPartition::build(members, table.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn read(text: &str, label: &str) -> Result<FeatureTable> {
        read_csv(text.as_bytes(), &CsvOptions::new(label))
    }

    #[test]
    fn parses_simple_file() {
        let t = read("f1,f2,label\n1,2,1\n3.5,-800,2\n0,0,1\n", "label").unwrap();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.n_features(), 2);
        assert_eq!(t.feature_names(), ["f1", "f2"]);
        assert_eq!(t.row(1), [3.5, -800.0]);
        assert_eq!(t.labels(), [1, 2, 1]);
        assert_eq!(t.n_classes(), 2);
    }

    #[test]
    fn label_column_may_sit_anywhere() {
        let t = read("a,label,b\n1,3,2\n", "label").unwrap();
        assert_eq!(t.feature_names(), ["a", "b"]);
        assert_eq!(t.row(0), [1.0, 2.0]);
    }

    #[test]
    fn reports_non_numeric_cell_location() {
        let err = read("f1,f2,label\n1,2,1\n1,abc,2\n", "label").unwrap_err();
        match err {
            Error::NonNumeric { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "f2");
            }
            other => panic!("unexpected {other:?}"),
        }
        let msg = read("f1,f2,label\n1,2,1\n1,abc,2\n", "label")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("row 2") && msg.contains("f2"), "{msg}");
    }

    #[test]
    fn rejects_nan_and_infinity() {
        for bad in ["NaN", "inf", "-inf"] {
            let err = read(&format!("f1,label\n{bad},1\n"), "label").unwrap_err();
            assert!(matches!(err, Error::NonFinite { row: 1, .. }), "{bad}: {err:?}");
        }
    }

    #[test]
    fn label_column_errors() {
        assert!(matches!(
            read("f1,f2\n1,2\n", "label"),
            Err(Error::MissingLabelColumn(_))
        ));
        assert!(matches!(
            read("label,f1,label\n1,2,1\n", "label"),
            Err(Error::DuplicateLabelColumn(_))
        ));
        assert!(matches!(
            read("f1,label\n1,x\n", "label"),
            Err(Error::InvalidLabel { row: 1, .. })
        ));
        assert!(matches!(
            read("f1,label\n1,0\n", "label"),
            Err(Error::InvalidLabel { .. })
        ));
        assert!(read("f1,label\n1,2.0\n", "label").is_ok());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_csv("/definitely/not/here.csv", "label").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn sparse_labels_with_declared_class_count() {
        let mut opts = CsvOptions::new("label");
        opts.n_classes = Some(5);
        let t = read_csv("f,label\n0,1\n1,3\n2,5\n3,5\n".as_bytes(), &opts).unwrap();
        let part = partition(&t).unwrap();
        let counts: Vec<usize> = part.counts().values().copied().collect();
        assert_eq!(counts, [1, 0, 1, 0, 2]);
        assert_eq!(part.majority_class(), 5);

        opts.n_classes = Some(4);
        assert!(read_csv("f,label\n0,5\n".as_bytes(), &opts).is_err());
    }

    #[test]
    fn ignored_columns_are_dropped() {
        let mut opts = CsvOptions::new("label");
        opts.ignore_columns = vec!["method".into()];
        let t = read_csv("f,method,label\n1,smote,1\n".as_bytes(), &opts).unwrap();
        assert_eq!(t.feature_names(), ["f"]);
    }

    #[test]
    fn aggregation_rule() {
        let agg = |r| aggregate_rating(&RatingSet::new(r).unwrap());
        assert_eq!(agg([1, 1, 1, 1]), 1);
        assert_eq!(agg([4, 4, 5, 5]), 5);
        assert_eq!(agg([2, 3, 3, 5]), 3);
        assert_eq!(agg([1, 2, 4, 5]), 3);
        assert_eq!(agg([1, 1, 1, 5]), 1);
        assert_eq!(agg([1, 1, 2, 2]), 2);
        assert!(RatingSet::new([0, 1, 2, 3]).is_err());
        assert!(RatingSet::new([1, 2, 3, 6]).is_err());
    }

    #[test]
    fn partition_counts_and_majority() {
        let t = FeatureTable::new(array![[0.0], [1.0], [2.0], [3.0]], vec![1, 3, 3, 2], vec!["f".into()])
            .unwrap();
        let part = partition(&t).unwrap();
        assert_eq!(part.counts(), BTreeMap::from([(1, 1), (2, 1), (3, 2)]));
        assert_eq!(part.majority_class(), 3);
        assert_eq!(part.members(3), [1, 2]);
    }

    #[test]
    fn table_one_majority() {
        let part = ClassPartition::from_counts(&[117, 85, 351, 166, 110]).unwrap();
        assert_eq!(part.majority_class(), 3);
        assert_eq!(part.majority_count(), 351);
        assert_eq!(part.members(2)[0], 117);
    }

    #[test]
    fn majority_tie_goes_to_lowest_label() {
        let part = ClassPartition::from_counts(&[2, 3, 3]).unwrap();
        assert_eq!(part.majority_class(), 2);
    }

    #[test]
    fn single_class_partition() {
        let t = FeatureTable::with_classes(array![[0.0], [1.0]], vec![2, 2], vec!["f".into()], 3)
            .unwrap();
        let part = partition(&t).unwrap();
        assert_eq!(part.present_classes().collect::<Vec<_>>(), [2]);
        assert_eq!(part.count(1), 0);
        assert_eq!(part.count(3), 0);
    }

    #[test]
    fn empty_table_cannot_be_partitioned() {
        let t = read("f,label\n", "label").unwrap();
        assert!(matches!(partition(&t), Err(Error::EmptyTable)));
    }

    #[test]
    fn write_then_read_preserves_values() {
        let t = FeatureTable::new(
            array![[0.1, -800.0], [1e-17, 3.25]],
            vec![1, 2],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&t, "label", &mut buf).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap(), "label").unwrap();
        assert_eq!(back, t);
    }
}
