//! Decision trees and a random forest, built from scratch on Gini
//! impurity with bootstrap sampling and per-node random feature subsets.

use crate::numerics::rng::SplitMix64;

use super::BaselineError;

/// Gini impurity 1 - sum p_c^2 over a class-count vector.
pub fn gini(class_counts: &[usize]) -> Result<f64, BaselineError> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(BaselineError::EmptyNode);
    }
    let total = total as f64;
    let sum_sq: f64 = class_counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            p * p
        })
        .sum();
    Ok(1.0 - sum_sq)
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        /// Normalized class distribution at this leaf.
        dist: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    root: Node,
    n_classes: usize,
}

impl DecisionTree {
    pub fn predict_dist(&self, features: &[f64]) -> &[f64] {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { dist } => return dist,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn is_single_leaf(&self) -> bool {
        matches!(self.root, Node::Leaf { .. })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub n_classes: usize,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

/// Mean of the trees' leaf distributions; sums to 1.
pub fn predict_forest(forest: &RandomForest, features: &[f64]) -> Vec<f64> {
    let mut dist = vec![0.0; forest.n_classes];
    for tree in &forest.trees {
        for (d, p) in dist.iter_mut().zip(tree.predict_dist(features)) {
            *d += p;
        }
    }
    let n = forest.trees.len() as f64;
    for d in dist.iter_mut() {
        *d /= n;
    }
    dist
}

pub fn predict_class(forest: &RandomForest, features: &[f64]) -> usize {
    let dist = predict_forest(forest, features);
    let mut best = 0;
    for (i, v) in dist.iter().enumerate() {
        if *v > dist[best] {
            best = i;
        }
    }
    best
}

fn class_counts(labels: &[usize], idx: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &i in idx {
        counts[labels[i]] += 1;
    }
    counts
}

fn leaf(labels: &[usize], idx: &[usize], n_classes: usize) -> Node {
    let counts = class_counts(labels, idx, n_classes);
    let total: usize = counts.iter().sum();
    let dist = counts
        .iter()
        .map(|&c| c as f64 / total.max(1) as f64)
        .collect();
    Node::Leaf { dist }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best Gini-gain split over a random feature subset. Features are
/// examined in ascending index order and thresholds ascending, and a
/// candidate replaces the incumbent only on a strictly larger gain, so
/// ties resolve to the lowest feature index, then the lowest threshold.
fn best_split(
    features: &[Vec<f64>],
    labels: &[usize],
    idx: &[usize],
    n_classes: usize,
    feats_per_split: usize,
    rng: &mut SplitMix64,
) -> Option<SplitChoice> {
    let n_features = features[0].len();
    let mut subset = rng.sample_indices(n_features, feats_per_split.min(n_features));
    subset.sort_unstable();

    let parent_counts = class_counts(labels, idx, n_classes);
    let parent_gini = gini(&parent_counts).ok()?;
    let n_total = idx.len() as f64;

    let mut best: Option<SplitChoice> = None;
    for &f in &subset {
        // Sort node samples by this feature's value.
        let mut ordered: Vec<usize> = idx.to_vec();
        ordered.sort_by(|&a, &b| {
            features[a][f]
                .partial_cmp(&features[b][f])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut left_counts = vec![0usize; n_classes];
        let mut right_counts = parent_counts.clone();
        for w in 0..ordered.len() - 1 {
            let i = ordered[w];
            left_counts[labels[i]] += 1;
            right_counts[labels[i]] -= 1;
            let (v, v_next) = (features[i][f], features[ordered[w + 1]][f]);
            if v == v_next {
                continue;
            }
            let threshold = (v + v_next) / 2.0;
            let n_left = (w + 1) as f64;
            let n_right = n_total - n_left;
            let weighted = (n_left / n_total) * gini(&left_counts).ok()?
                + (n_right / n_total) * gini(&right_counts).ok()?;
            let gain = parent_gini - weighted;
            if gain > best.as_ref().map_or(0.0, |b| b.gain) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn build_node(
    features: &[Vec<f64>],
    labels: &[usize],
    idx: &[usize],
    n_classes: usize,
    depth: usize,
    max_depth: usize,
    feats_per_split: usize,
    min_samples_split: usize,
    rng: &mut SplitMix64,
) -> Node {
    let counts = class_counts(labels, idx, n_classes);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if depth >= max_depth || pure || idx.len() < min_samples_split {
        return leaf(labels, idx, n_classes);
    }
    let Some(choice) = best_split(features, labels, idx, n_classes, feats_per_split, rng) else {
        return leaf(labels, idx, n_classes);
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| features[i][choice.feature] <= choice.threshold);
    if left_idx.is_empty() || right_idx.is_empty() {
        return leaf(labels, idx, n_classes);
    }
    let left = build_node(
        features,
        labels,
        &left_idx,
        n_classes,
        depth + 1,
        max_depth,
        feats_per_split,
        min_samples_split,
        rng,
    );
    let right = build_node(
        features,
        labels,
        &right_idx,
        n_classes,
        depth + 1,
        max_depth,
        feats_per_split,
        min_samples_split,
        rng,
    );
    Node::Split {
        feature: choice.feature,
        threshold: choice.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Trains one forest: per-tree seeds are `seed + tree_index`, each tree
/// bootstraps its sample and uses sqrt(d) features per node.
pub fn build_forest(
    features: &[Vec<f64>],
    labels: &[usize],
    idx: &[usize],
    n_classes: usize,
    n_trees: usize,
    max_depth: usize,
    min_samples_split: usize,
    seed: u64,
) -> RandomForest {
    let n_features = features[0].len();
    let feats_per_split = ((n_features as f64).sqrt().floor() as usize).max(1);
    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let mut rng = SplitMix64::new(seed.wrapping_add(t as u64));
        let bootstrap: Vec<usize> = (0..idx.len()).map(|_| idx[rng.below(idx.len())]).collect();
        let root = build_node(
            features,
            labels,
            &bootstrap,
            n_classes,
            0,
            max_depth,
            feats_per_split,
            min_samples_split,
            &mut rng,
        );
        trees.push(DecisionTree { root, n_classes });
    }
    RandomForest {
        trees,
        n_classes,
        n_trees,
        max_depth,
        seed,
    }
}

/// Grid and stopping parameters for the tuned forest.
#[derive(Debug, Clone)]
pub struct ForestParams {
    pub n_trees_grid: Vec<usize>,
    pub max_depth_grid: Vec<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees_grid: vec![50, 100, 200],
            max_depth_grid: vec![4, 8, 16],
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestTuneReport {
    pub chosen_n_trees: usize,
    pub chosen_max_depth: usize,
    /// Macro-F1 on the 30% test split for the chosen configuration.
    pub test_f1: f64,
    /// Final scores on the held-out 20% validation split.
    pub validation_accuracy: f64,
    pub validation_f1: f64,
    pub warnings: Vec<String>,
}

fn macro_f1_and_accuracy(
    forest: &RandomForest,
    features: &[Vec<f64>],
    labels: &[usize],
    idx: &[usize],
) -> (f64, f64) {
    let k = forest.n_classes;
    let mut confusion = vec![vec![0usize; k]; k];
    for &i in idx {
        let predicted = predict_class(forest, &features[i]);
        confusion[labels[i]][predicted] += 1;
    }
    let mut f1_sum = 0.0;
    let mut correct = 0usize;
    for c in 0..k {
        let tp = confusion[c][c];
        correct += tp;
        let col: usize = (0..k).map(|r| confusion[r][c]).sum();
        let row: usize = confusion[c].iter().sum();
        let precision = if col == 0 { 0.0 } else { tp as f64 / col as f64 };
        let recall = if row == 0 { 0.0 } else { tp as f64 / row as f64 };
        if precision + recall > 0.0 {
            f1_sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    (f1_sum / k as f64, correct as f64 / idx.len() as f64)
}

/// Trains a tuned forest: the data is split 50/30/20 (train/test/
/// validation) with the seed, every grid configuration is trained on the
/// train split and scored by macro-F1 on the test split, the best is
/// retrained on train+test, and the tune report carries its validation
/// scores. Ties go to the earlier grid entry.
pub fn train_forest(
    features: &[Vec<f64>],
    labels: &[usize],
    params: &ForestParams,
    seed: u64,
) -> Result<(RandomForest, ForestTuneReport), BaselineError> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(BaselineError::BadInput(format!(
            "need matching non-empty features/labels, got {}/{}",
            features.len(),
            labels.len()
        )));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    if labels.iter().collect::<std::collections::HashSet<_>>().len() < 2 {
        return Err(BaselineError::SingleClass);
    }
    if params.n_trees_grid.is_empty() || params.max_depth_grid.is_empty() {
        return Err(BaselineError::BadInput("empty tuning grid".into()));
    }

    let n = features.len();
    let mut indices: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed ^ 0xF0E1_D2C3_B4A5_9687).shuffle(&mut indices);
    let train_end = n / 2;
    let test_end = train_end + (n * 3) / 10;
    let train = &indices[..train_end];
    let test = &indices[train_end..test_end];
    let validation = &indices[test_end..];
    if train.is_empty() || test.is_empty() || validation.is_empty() {
        return Err(BaselineError::BadInput(
            "too few instances for a 50/30/20 split".into(),
        ));
    }

    let mut best: Option<(usize, usize, f64)> = None;
    for &n_trees in &params.n_trees_grid {
        for &max_depth in &params.max_depth_grid {
            let forest = build_forest(
                features,
                labels,
                train,
                n_classes,
                n_trees,
                max_depth,
                params.min_samples_split,
                seed,
            );
            let (f1, _) = macro_f1_and_accuracy(&forest, features, labels, test);
            if best.as_ref().map_or(true, |&(_, _, b)| f1 > b) {
                best = Some((n_trees, max_depth, f1));
            }
        }
    }
    let (n_trees, max_depth, test_f1) = best.expect("non-empty grid");

    let mut final_train: Vec<usize> = train.to_vec();
    final_train.extend_from_slice(test);
    let forest = build_forest(
        features,
        labels,
        &final_train,
        n_classes,
        n_trees,
        max_depth,
        params.min_samples_split,
        seed,
    );
    let mut warnings = Vec::new();
    let degenerate = forest.trees.iter().filter(|t| t.is_single_leaf()).count();
    if degenerate == forest.trees.len() {
        warnings.push(
            "all trees are single leaves (features carry no signal); predictions are the majority class"
                .to_string(),
        );
    }
    let (validation_f1, validation_accuracy) =
        macro_f1_and_accuracy(&forest, features, labels, validation);
    Ok((
        forest,
        ForestTuneReport {
            chosen_n_trees: n_trees,
            chosen_max_depth: max_depth,
            test_f1,
            validation_accuracy,
            validation_f1,
            warnings,
        },
    ))
}
