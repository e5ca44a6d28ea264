//! Exact Euclidean k-nearest-neighbor search.
//!
//! Queries scan every candidate row. Results are ordered by squared distance,
//! ties broken by lower row index, so the output is fully deterministic.

use std::cmp::Ordering;

use log::warn;
use serde::Serialize;

use crate::data::{partition, ClassLabel, ClassPartition, FeatureTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub row: usize,
    pub class: ClassLabel,
    /// Squared Euclidean distance in the index's (possibly scaled) space.
    pub sq_distance: f64,
}

/// The nearest neighbors of one row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborSet {
    pub owner: usize,
    pub neighbors: Vec<Neighbor>,
    /// Number of neighbors whose class differs from the owner's (`H`).
    pub out_of_class: usize,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.neighbors.iter().map(|n| n.row)
    }
}

/// Per-feature min-max scaling used for distances only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinMaxScaling {
    pub min: Vec<f64>,
    /// `max - min`; zero for constant features, which then map to 0.
    pub range: Vec<f64>,
}

impl MinMaxScaling {
    pub fn fit(table: &FeatureTable) -> Self {
        let p = table.n_features();
        let mut min = vec![f64::INFINITY; p];
        let mut max = vec![f64::NEG_INFINITY; p];
        for r in 0..table.n_rows() {
            for (j, &v) in table.row(r).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        if table.is_empty() {
            min.fill(0.0);
            max.fill(0.0);
        }
        let range = min.iter().zip(&max).map(|(lo, hi)| hi - lo).collect();
        Self { min, range }
    }

    pub fn apply(&self, feature: usize, value: f64) -> f64 {
        let range = self.range[feature];
        if range > 0.0 {
            (value - self.min[feature]) / range
        } else {
            0.0
        }
    }
}

/// Brute-force neighbor index over a feature table.
#[derive(Debug, Clone)]
pub struct NeighborIndex<'a> {
    table: &'a FeatureTable,
    scaling: Option<MinMaxScaling>,
    /// Row-major copy of the points in distance space.
    points: Vec<f64>,
    classes: Option<ClassPartition>,
}

impl<'a> NeighborIndex<'a> {
    /// Builds an index; with `scale` every feature's observed range is mapped onto `[0, 1]`.
    pub fn build(table: &'a FeatureTable, scale: bool) -> Self {
        let scaling = scale.then(|| MinMaxScaling::fit(table));
        let p = table.n_features();
        let mut points = Vec::with_capacity(table.n_rows() * p);
        for r in 0..table.n_rows() {
            match &scaling {
                Some(s) => points.extend(table.row(r).iter().enumerate().map(|(j, &v)| s.apply(j, v))),
                None => points.extend_from_slice(table.row(r)),
            }
        }
        let classes = partition(table).ok();
        Self {
            table,
            scaling,
            points,
            classes,
        }
    }

    pub fn table(&self) -> &'a FeatureTable {
        self.table
    }

    pub fn scaling(&self) -> Option<&MinMaxScaling> {
        self.scaling.as_ref()
    }

    /// A row as seen by the distance computation.
    pub fn point(&self, row: usize) -> &[f64] {
        let p = self.table.n_features();
        &self.points[row * p..(row + 1) * p]
    }

    pub fn sq_distance(&self, a: usize, b: usize) -> f64 {
        self.point(a)
            .iter()
            .zip(self.point(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    }

    /// The `k` nearest rows over all classes, owner excluded.
    pub fn knn_all(&self, owner: usize, k: usize) -> Result<NeighborSet> {
        self.check_owner(owner, k)?;
        let n = self.table.n_rows();
        if k > n - 1 {
            return Err(Error::KTooLarge { k, rows: n });
        }
        Ok(self.nearest(owner, (0..n).filter(|&r| r != owner), k))
    }

    /// The `k` nearest rows of class `class`, owner excluded.
    ///
    /// When the class has fewer than `k` candidates all of them are returned
    /// and a warning is logged; zero candidates is an error.
    pub fn knn_within(&self, owner: usize, k: usize, class: ClassLabel) -> Result<NeighborSet> {
        self.check_owner(owner, k)?;
        let members = self.classes.as_ref().map(|p| p.members(class)).unwrap_or(&[]);
        let available = members.iter().filter(|&&r| r != owner).count();
        if available == 0 {
            return Err(Error::NoWithinClassNeighbor { class, owner });
        }
        if available < k {
            warn!(
                "class {class} has only {available} neighbors for row {owner}; using k = {available} instead of {k}"
            );
        }
        Ok(self.nearest(owner, members.iter().copied().filter(|&r| r != owner), k))
    }

    fn check_owner(&self, owner: usize, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if owner >= self.table.n_rows() {
            return Err(Error::RowOutOfRange(owner));
        }
        Ok(())
    }

    fn nearest(&self, owner: usize, candidates: impl Iterator<Item = usize>, k: usize) -> NeighborSet {
        let mut scored: Vec<(f64, usize)> = candidates
            .map(|r| (self.sq_distance(owner, r), r))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, by_distance);
            scored.truncate(k);
        }
        scored.sort_unstable_by(by_distance);

        let owner_class = self.table.label(owner);
        let neighbors: Vec<Neighbor> = scored
            .into_iter()
            .map(|(d, row)| Neighbor {
                row,
                class: self.table.label(row),
                sq_distance: d,
            })
            .collect();
        let out_of_class = neighbors.iter().filter(|n| n.class != owner_class).count();
        NeighborSet {
            owner,
            neighbors,
            out_of_class,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn table_1d(values: &[f64], labels: &[ClassLabel]) -> FeatureTable {
        let m = Array2::from_shape_vec((values.len(), 1), values.to_vec()).unwrap();
        FeatureTable::new(m, labels.to_vec(), vec!["x".into()]).unwrap()
    }

    #[test]
    fn all_class_query_counts_out_of_class() {
        let t = table_1d(&[0.0, 1.0, 10.0], &[1, 1, 2]);
        let idx = NeighborIndex::build(&t, false);
        let ns = idx.knn_all(0, 2).unwrap();
        assert_eq!(ns.rows().collect::<Vec<_>>(), [1, 2]);
        assert_eq!(ns.neighbors[1].class, 2);
        assert_eq!(ns.out_of_class, 1);
    }

    #[test]
    fn duplicates_come_first() {
        let t = table_1d(&[5.0, 4.0, 5.0, 5.0], &[1, 1, 1, 2]);
        let idx = NeighborIndex::build(&t, false);
        let ns = idx.knn_all(2, 3).unwrap();
        assert_eq!(ns.rows().collect::<Vec<_>>(), [0, 3, 1]);
        assert_eq!(ns.neighbors[0].sq_distance, 0.0);
    }

    #[test]
    fn k_equal_to_rows_minus_one_returns_everything() {
        let t = table_1d(&[3.0, 1.0, 2.0, 0.0], &[1, 1, 2, 2]);
        let idx = NeighborIndex::build(&t, false);
        let ns = idx.knn_all(0, 3).unwrap();
        assert_eq!(ns.rows().collect::<Vec<_>>(), [2, 1, 3]);
        assert!(matches!(idx.knn_all(0, 4), Err(Error::KTooLarge { k: 4, rows: 4 })));
        assert!(matches!(idx.knn_all(0, 0), Err(Error::ZeroK)));
        assert!(matches!(idx.knn_all(9, 1), Err(Error::RowOutOfRange(9))));
    }

    #[test]
    fn within_class_skips_closer_foreign_rows() {
        // c1: {0, 5}, c2: {1}
        let t = table_1d(&[0.0, 5.0, 1.0], &[1, 1, 2]);
        let idx = NeighborIndex::build(&t, false);
        let ns = idx.knn_within(0, 1, 1).unwrap();
        assert_eq!(ns.rows().collect::<Vec<_>>(), [1]);
        assert_eq!(ns.out_of_class, 0);
    }

    #[test]
    fn within_class_with_exactly_k_plus_one_members() {
        let t = table_1d(&[0.0, 2.0, 1.0, 9.0], &[1, 1, 1, 2]);
        let idx = NeighborIndex::build(&t, false);
        let ns = idx.knn_within(0, 2, 1).unwrap();
        assert_eq!(ns.rows().collect::<Vec<_>>(), [2, 1]);
    }

    #[test]
    fn within_class_reduces_k_or_fails() {
        let t = table_1d(&[0.0, 2.0, 1.0], &[1, 1, 2]);
        let idx = NeighborIndex::build(&t, false);
        assert_eq!(idx.knn_within(0, 5, 1).unwrap().len(), 1);
        assert!(matches!(
            idx.knn_within(2, 1, 2),
            Err(Error::NoWithinClassNeighbor { class: 2, owner: 2 })
        ));
    }

    #[test]
    fn scaling_maps_range_to_unit_interval() {
        let t = FeatureTable::new(
            array![[0.0, 7.0], [100.0, 7.0], [50.0, 7.0]],
            vec![1, 1, 2],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let idx = NeighborIndex::build(&t, true);
        let s = idx.scaling().unwrap();
        assert_eq!(s.apply(0, 100.0), 1.0);
        assert_eq!(idx.point(1), [1.0, 0.0]);
        assert_eq!(idx.point(2), [0.5, 0.0]);
        assert_eq!(s.range[1], 0.0);
    }

    #[test]
    fn scaling_changes_which_neighbor_is_nearest() {
        // feature 0 spans thousands, feature 1 spans 1
        let t = FeatureTable::new(
            array![[0.0, 0.0], [10.0, 1.0], [30.0, 0.0], [1000.0, 1.0]],
            vec![1, 1, 1, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let raw = NeighborIndex::build(&t, false);
        let scaled = NeighborIndex::build(&t, true);
        assert_eq!(raw.knn_all(0, 1).unwrap().neighbors[0].row, 1);
        assert_eq!(scaled.knn_all(0, 1).unwrap().neighbors[0].row, 2);
    }
}
