//! Random forest of Gini-split CART trees with majority voting.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ClassLabel, FeatureTable};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

// Splits must lower impurity by more than this to be kept.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `ceil(sqrt(p))` when `None`.
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Fit each tree on a bootstrap sample. Disabling it makes every tree
    /// see the full training set.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            mtry: None,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.n_trees = n_trees;
        self
    }

    pub fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Training rows per class, indexed by `label - 1`.
        counts: Vec<usize>,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Class with the most training rows in the leaf reached by `x`; ties go to the lowest label.
    pub fn predict(&self, x: &[f64]) -> ClassLabel {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return argmax_lowest(counts),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Grows a tree on `rows` of `table` (duplicates allowed).
    pub fn fit(table: &FeatureTable, rows: Vec<usize>, params: &ForestParams, rng: &mut StreamRng) -> Self {
        let n_classes = table.n_classes() as usize;
        let p = table.n_features();
        let mtry = params.resolved_mtry(p);
        let min_leaf = params.min_samples_leaf.max(1);
        let mut nodes = Vec::new();
        // (slot, rows, depth)
        let mut stack = vec![(0usize, rows, 0usize)];
        nodes.push(Node::Leaf { counts: Vec::new() });

        while let Some((slot, rows, depth)) = stack.pop() {
            let counts = class_counts(table, &rows, n_classes);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
            let split = if pure || depth_capped || rows.len() < 2 * min_leaf {
                None
            } else {
                let features = rand::seq::index::sample(rng, p, mtry).into_vec();
                best_split(table, &rows, &counts, &features, min_leaf)
            };
            match split {
                None => nodes[slot] = Node::Leaf { counts },
                Some((feature, threshold)) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        rows.into_iter().partition(|&row| table.row(row)[feature] <= threshold);
                    let left = nodes.len();
                    nodes.push(Node::Leaf { counts: Vec::new() });
                    let right = nodes.len();
                    nodes.push(Node::Leaf { counts: Vec::new() });
                    nodes[slot] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        Self { nodes }
    }
}

fn class_counts(table: &FeatureTable, rows: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &r in rows {
        counts[table.label(r) as usize - 1] += 1;
    }
    counts
}

fn argmax_lowest(counts: &[usize]) -> ClassLabel {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best as ClassLabel + 1
}

fn gini(sum_sq: f64, n: f64) -> f64 {
    1.0 - sum_sq / (n * n)
}

/// Best (feature, threshold) by weighted Gini impurity among `features`, if
/// any split lowers impurity. Earlier features and lower thresholds win ties.
fn best_split(
    table: &FeatureTable,
    rows: &[usize],
    counts: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<(usize, f64)> {
    let n = rows.len();
    let total_sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    let parent = gini(total_sq, n as f64);
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; counts.len()];

    for &f in features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (table.row(r)[f], table.label(r) as usize - 1)));
        sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        if sorted[0].0 == sorted[n - 1].0 {
            continue;
        }
        left.fill(0);
        let mut left_sq = 0.0;
        let mut right_sq = total_sq;
        for i in 0..n - 1 {
            let k = sorted[i].1;
            let right_k = counts[k] - left[k];
            left_sq += (2 * left[k] + 1) as f64;
            right_sq -= (2 * right_k - 1) as f64;
            left[k] += 1;

            let (v, next) = (sorted[i].0, sorted[i + 1].0);
            let nl = i + 1;
            let nr = n - nl;
            if v == next || nl < min_leaf || nr < min_leaf {
                continue;
            }
            let impurity =
                (nl as f64 * gini(left_sq, nl as f64) + nr as f64 * gini(right_sq, nr as f64)) / n as f64;
            if parent - impurity > MIN_GAIN && best.is_none_or(|(b, _, _)| impurity < b) {
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                best = Some((impurity, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    mtry: usize,
    seed: u64,
    n_classes: ClassLabel,
    n_features: usize,
}

impl RandomForest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn mtry(&self) -> usize {
        self.mtry
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Majority vote of the trees; ties go to the lowest label.
    pub fn predict(&self, x: &[f64]) -> Result<ClassLabel> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        Ok(argmax_lowest(&self.votes(x)))
    }

    /// Votes per class, indexed by `label - 1`.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut votes = vec![0; self.n_classes as usize];
        for tree in &self.trees {
            votes[tree.predict(x) as usize - 1] += 1;
        }
        votes
    }

    pub fn predict_table(&self, table: &FeatureTable) -> Result<Vec<ClassLabel>> {
        (0..table.n_rows()).map(|r| self.predict(table.row(r))).collect()
    }

    /// Tree structure as JSON, for inspection only.
    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }
}

/// Trains `params.n_trees` trees, each from its own RNG stream.
pub fn train_forest(train: &FeatureTable, params: &ForestParams, seed: u64) -> Result<RandomForest> {
    if train.is_empty() {
        return Err(Error::EmptyTable);
    }
    if params.n_trees == 0 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    let first = train.label(0);
    if train.labels().iter().all(|&l| l == first) {
        return Err(Error::SingleClass);
    }
    let p = train.n_features();
    if let Some(m) = params.mtry {
        if m == 0 || m > p {
            return Err(Error::Config(format!("mtry must be in 1..={p}, got {m}")));
        }
    }
    let n = train.n_rows();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, &[rng::TAG_TREE, t as u64]);
            let rows = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            DecisionTree::fit(train, rows, params, &mut rng)
        })
        .collect();
    Ok(RandomForest {
        trees,
        mtry: params.resolved_mtry(p),
        seed,
        n_classes: train.n_classes(),
        n_features: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn table(xs: &[f64], labels: &[ClassLabel]) -> FeatureTable {
        let m = Array2::from_shape_vec((xs.len(), 1), xs.to_vec()).unwrap();
        FeatureTable::new(m, labels.to_vec(), vec!["x".into()]).unwrap()
    }

    fn cart() -> ForestParams {
        ForestParams {
            n_trees: 1,
            mtry: None,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: false,
        }
    }

    #[test]
    fn separable_line_is_learned() {
        let t = table(&[0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0], &[1, 1, 1, 1, 2, 2, 2]);
        let f = train_forest(&t, &ForestParams::default().with_trees(1), 3).unwrap();
        // a bootstrap tree is perfect on the points it saw; with no bootstrap on all of them
        let f2 = train_forest(&t, &cart(), 3).unwrap();
        assert_eq!(f2.predict_table(&t).unwrap(), t.labels());
        assert_eq!(f2.trees()[0].depth(), 1);
        match &f2.trees()[0].nodes()[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 6.5),
            other => panic!("{other:?}"),
        }
        assert_eq!(f.n_trees(), 1);
    }

    #[test]
    fn cart_fits_consistent_data_exactly() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let labels: Vec<ClassLabel> = (0..40).map(|i| [1, 2, 3, 2, 1][(i / 3) % 5]).collect();
        let t = table(&xs, &labels);
        let f = train_forest(&t, &cart(), 0).unwrap();
        assert_eq!(f.predict_table(&t).unwrap(), labels);
    }

    #[test]
    fn single_leaf_tree_predicts_its_class() {
        let tree = DecisionTree {
            nodes: vec![Node::Leaf { counts: vec![0, 0, 4] }],
        };
        assert_eq!(tree.predict(&[123.0]), 3);
    }

    #[test]
    fn votes_tie_to_lowest_label() {
        let leaf = |c: usize| DecisionTree {
            nodes: vec![Node::Leaf {
                counts: (1..=4).map(|l| usize::from(l == c)).collect(),
            }],
        };
        let forest = RandomForest {
            trees: vec![leaf(4), leaf(2)],
            mtry: 1,
            seed: 0,
            n_classes: 4,
            n_features: 1,
        };
        assert_eq!(forest.predict(&[0.0]).unwrap(), 2);
        let forest = RandomForest {
            trees: vec![leaf(4), leaf(2), leaf(4)],
            ..forest
        };
        assert_eq!(forest.predict(&[0.0]).unwrap(), 4);
        assert!(forest.predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn same_seed_same_forest() {
        let xs: Vec<f64> = (0..60).map(|i| ((i * 37) % 23) as f64).collect();
        let labels: Vec<ClassLabel> = (0..60).map(|i| (i % 3) as ClassLabel + 1).collect();
        let t = table(&xs, &labels);
        let params = ForestParams::default().with_trees(7);
        let a = train_forest(&t, &params, 42).unwrap();
        let b = train_forest(&t, &params, 42).unwrap();
        assert_eq!(a, b);
        let c = train_forest(&t, &params, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn training_errors() {
        let t = table(&[0.0, 1.0], &[2, 2]);
        assert!(matches!(train_forest(&t, &cart(), 0), Err(Error::SingleClass)));
        let t = table(&[0.0, 1.0], &[1, 2]);
        let mut p = cart();
        p.mtry = Some(2);
        assert!(train_forest(&t, &p, 0).is_err());
        p.mtry = None;
        p.n_trees = 0;
        assert!(train_forest(&t, &p, 0).is_err());
    }

    #[test]
    fn constant_feature_yields_leaf() {
        let t = table(&[1.0, 1.0, 1.0], &[1, 2, 2]);
        let f = train_forest(&t, &cart(), 0).unwrap();
        assert_eq!(f.trees()[0].nodes().len(), 1);
        assert_eq!(f.predict(&[1.0]).unwrap(), 2);
    }

    #[test]
    fn default_mtry_is_ceil_sqrt() {
        let p = ForestParams::default();
        assert_eq!(p.resolved_mtry(65), 9);
        assert_eq!(p.resolved_mtry(1), 1);
        assert_eq!(p.resolved_mtry(10), 4);
    }
}
