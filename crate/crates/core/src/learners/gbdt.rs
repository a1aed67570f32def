//! Gradient-boosted regression trees for binary classification.
//!
//! Trees grow leaf-wise: the leaf with the largest loss reduction is split
//! next, until `max_leaves` is reached or no split helps. Splits are found
//! exactly by scanning each feature's rows in presorted order.

use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Matrix};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    /// Weight of every positive row. `None` uses the negative/positive ratio
    /// of the training labels, capped at 100.
    pub positive_class_weight: Option<f64>,
    pub rng_seed: u64,
    /// Fraction of features considered per tree.
    pub feature_subsample: f64,
    /// L2 penalty on leaf values.
    pub l2_regularization: f64,
    /// Minimum hessian mass in a leaf.
    pub min_hessian_leaf: f64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            n_trees: 100,
            learning_rate: 0.1,
            max_leaves: 31,
            min_samples_leaf: 20,
            positive_class_weight: None,
            rng_seed: 0,
            feature_subsample: 1.0,
            l2_regularization: 1.0,
            min_hessian_leaf: 1e-3,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_trees == 0 {
            return fail("n_trees must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return fail(format!("learning_rate {} outside (0, 1]", self.learning_rate));
        }
        if self.max_leaves < 2 {
            return fail(format!("max_leaves {} below 2", self.max_leaves));
        }
        if self.min_samples_leaf == 0 {
            return fail("min_samples_leaf must be at least 1".into());
        }
        if let Some(w) = self.positive_class_weight {
            if !(w > 0.0 && w.is_finite()) {
                return fail(format!("positive_class_weight {w} must be positive"));
            }
        }
        if !(self.feature_subsample > 0.0 && self.feature_subsample <= 1.0) {
            return fail(format!("feature_subsample {} outside (0, 1]", self.feature_subsample));
        }
        if !(self.l2_regularization >= 0.0 && self.l2_regularization.is_finite()) {
            return fail(format!("l2_regularization {} must be non-negative", self.l2_regularization));
        }
        if !(self.min_hessian_leaf >= 0.0) {
            return fail(format!("min_hessian_leaf {} must be non-negative", self.min_hessian_leaf));
        }
        Ok(())
    }
}

/// A regression tree; rows with `value <= threshold` go left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split {
                feature, left, right, ..
            } => [Some(*feature), left.max_feature(), right.max_feature()]
                .into_iter()
                .flatten()
                .max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub format_version: u32,
    pub n_features: usize,
    /// Log-odds of the weighted training prior.
    pub base_score: f64,
    pub trees: Vec<TreeNode>,
}

impl GbdtModel {
    pub fn predict_raw(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.predict_raw(row))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: GbdtModel = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        if let Some(f) = model.trees.iter().filter_map(TreeNode::max_feature).max() {
            if f >= model.n_features {
                return Err(Error::Schema(format!(
                    "split on feature {f} in a {}-feature model",
                    model.n_features
                )));
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Weighted logistic loss of one row at raw score `raw`.
pub fn logistic_loss(raw: f64, label: f64, weight: f64) -> f64 {
    // ln(1 + e^raw) computed without overflow.
    let softplus = if raw > 0.0 {
        raw + (-raw).exp().ln_1p()
    } else {
        raw.exp().ln_1p()
    };
    weight * (softplus - label * raw)
}

/// First and second derivative of [`logistic_loss`] with respect to `raw`.
pub fn logistic_gradients(raw: f64, label: f64, weight: f64) -> (f64, f64) {
    let p = sigmoid(raw);
    (weight * (p - label), weight * p * (1.0 - p))
}

pub fn train_gbdt(x: &Matrix, labels: &[u8], params: &GbdtParams) -> Result<GbdtModel> {
    train_gbdt_traced(x, labels, params).map(|(m, _)| m)
}

pub fn predict_gbdt(model: &GbdtModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            actual: x.cols(),
        });
    }
    Ok(x.iter_rows().map(|r| model.predict_proba(r)).collect())
}

/// Trains a model and also returns the mean weighted training loss after
/// each tree.
pub fn train_gbdt_traced(x: &Matrix, labels: &[u8], params: &GbdtParams) -> Result<(GbdtModel, Vec<f64>)> {
    params.validate()?;
    let n = x.rows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: labels.len(),
        });
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::invalid(format!("label {bad} is not 0 or 1")));
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("feature matrix contains a non-finite value"));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = n - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::invalid("training labels contain a single class"));
    }

    let pos_weight = params
        .positive_class_weight
        .unwrap_or_else(|| (negatives as f64 / positives as f64).min(100.0));
    let weights: Vec<f64> = labels.iter().map(|&l| if l == 1 { pos_weight } else { 1.0 }).collect();
    let targets: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let total_weight: f64 = weights.iter().sum();
    let base_score = (pos_weight * positives as f64 / negatives as f64).ln();

    let d = x.cols();
    let presorted: Vec<Vec<u32>> = (0..d)
        .map(|j| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| x.get(a as usize, j).total_cmp(&x.get(b as usize, j)));
            idx
        })
        .collect();

    let mut raw = vec![base_score; n];
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let per_tree = ((params.feature_subsample * d as f64).ceil() as usize).clamp(1, d.max(1));
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut history = Vec::with_capacity(params.n_trees);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];

    for _ in 0..params.n_trees {
        for i in 0..n {
            let (g, h) = logistic_gradients(raw[i], targets[i], weights[i]);
            grad[i] = g;
            hess[i] = h;
        }
        let features: Vec<usize> = if per_tree >= d {
            (0..d).collect()
        } else {
            let mut f = sample(&mut rng, d, per_tree).into_vec();
            f.sort_unstable();
            f
        };
        let tree = TreeBuilder {
            x,
            grad: &grad,
            hess: &hess,
            params,
        }
        .grow(&features, &presorted);
        for (i, r) in raw.iter_mut().enumerate() {
            *r += tree.predict(x.row(i));
        }
        trees.push(tree);
        let loss: f64 = (0..n).map(|i| logistic_loss(raw[i], targets[i], weights[i])).sum();
        history.push(loss / total_weight);
    }

    Ok((
        GbdtModel {
            format_version: MODEL_FORMAT_VERSION,
            n_features: d,
            base_score,
            trees,
        },
        history,
    ))
}

#[derive(Clone, Copy, Debug)]
struct SplitChoice {
    gain: f64,
    /// Position in `features` of the split feature.
    slot: usize,
    /// Number of rows that go left in that feature's sorted order.
    left_count: usize,
    threshold: f64,
}

struct OpenLeaf {
    node: usize,
    /// Row indices sorted by each considered feature.
    sorted: Vec<Vec<u32>>,
    grad_sum: f64,
    hess_sum: f64,
    best: Option<SplitChoice>,
}

enum ArenaNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbdtParams,
}

impl TreeBuilder<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.params.l2_regularization)
    }

    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -self.params.learning_rate * g / (h + self.params.l2_regularization)
    }

    fn best_split(&self, features: &[usize], leaf: &OpenLeaf) -> Option<SplitChoice> {
        let n = leaf.sorted.first().map_or(0, Vec::len);
        let min_leaf = self.params.min_samples_leaf;
        if n < 2 * min_leaf {
            return None;
        }
        let parent = self.score(leaf.grad_sum, leaf.hess_sum);
        let mut best: Option<SplitChoice> = None;
        for (slot, &feature) in features.iter().enumerate() {
            let rows = &leaf.sorted[slot];
            let (mut gl, mut hl) = (0.0, 0.0);
            for i in 0..n - 1 {
                let r = rows[i] as usize;
                gl += self.grad[r];
                hl += self.hess[r];
                let left_count = i + 1;
                if left_count < min_leaf {
                    continue;
                }
                if n - left_count < min_leaf {
                    break;
                }
                let here = self.x.get(r, feature);
                let next = self.x.get(rows[i + 1] as usize, feature);
                if next <= here {
                    continue;
                }
                let (gr, hr) = (leaf.grad_sum - gl, leaf.hess_sum - hl);
                if hl < self.params.min_hessian_leaf || hr < self.params.min_hessian_leaf {
                    continue;
                }
                let gain = self.score(gl, hl) + self.score(gr, hr) - parent;
                let better = match best {
                    None => true,
                    Some(b) if gain == b.gain => {
                        left_rows_key(&leaf.sorted[slot][..left_count])
                            < left_rows_key(&leaf.sorted[b.slot][..b.left_count])
                    }
                    Some(b) => gain > b.gain,
                };
                if better {
                    let mid = here + (next - here) / 2.0;
                    let threshold = if mid < next { mid } else { here };
                    best = Some(SplitChoice {
                        gain,
                        slot,
                        left_count,
                        threshold,
                    });
                }
            }
        }
        best.filter(|b| b.gain > 1e-12)
    }

    fn grow(&self, features: &[usize], presorted: &[Vec<u32>]) -> TreeNode {
        let sorted: Vec<Vec<u32>> = features.iter().map(|&f| presorted[f].clone()).collect();
        let grad_sum: f64 = self.grad.iter().sum();
        let hess_sum: f64 = self.hess.iter().sum();
        let mut arena = vec![ArenaNode::Leaf(self.leaf_value(grad_sum, hess_sum))];
        let mut root = OpenLeaf {
            node: 0,
            sorted,
            grad_sum,
            hess_sum,
            best: None,
        };
        root.best = self.best_split(features, &root);
        let mut open = vec![root];
        let mut goes_left = vec![false; self.x.rows()];
        let mut leaves = 1;

        while leaves < self.params.max_leaves {
            let mut pick: Option<usize> = None;
            for (i, leaf) in open.iter().enumerate() {
                if let Some(b) = leaf.best {
                    if pick.is_none_or(|p| b.gain > open[p].best.expect("picked leaves have a split").gain) {
                        pick = Some(i);
                    }
                }
            }
            let Some(pick) = pick else { break };
            let leaf = open.swap_remove(pick);
            let split = leaf.best.expect("picked leaves have a split");

            let split_rows = &leaf.sorted[split.slot];
            for &r in &split_rows[..split.left_count] {
                goes_left[r as usize] = true;
            }
            let (mut left_sorted, mut right_sorted) = (Vec::new(), Vec::new());
            for rows in &leaf.sorted {
                let (l, r): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&r| goes_left[r as usize]);
                left_sorted.push(l);
                right_sorted.push(r);
            }
            for &r in &split_rows[..split.left_count] {
                goes_left[r as usize] = false;
            }

            // Sum in row-index order so the result does not depend on which
            // feature happens to be listed first.
            let sums = |rows: &[u32]| {
                let mut rows = rows.to_vec();
                rows.sort_unstable();
                rows.iter()
                    .fold((0.0, 0.0), |(g, h), &r| (g + self.grad[r as usize], h + self.hess[r as usize]))
            };
            let (gl, hl) = sums(&left_sorted[0]);
            let (gr, hr) = sums(&right_sorted[0]);
            let left_node = arena.len();
            arena.push(ArenaNode::Leaf(self.leaf_value(gl, hl)));
            arena.push(ArenaNode::Leaf(self.leaf_value(gr, hr)));
            arena[leaf.node] = ArenaNode::Split {
                feature: features[split.slot],
                threshold: split.threshold,
                left: left_node,
                right: left_node + 1,
            };
            leaves += 1;

            for (node, sorted, g, h) in [
                (left_node, left_sorted, gl, hl),
                (left_node + 1, right_sorted, gr, hr),
            ] {
                let mut child = OpenLeaf {
                    node,
                    sorted,
                    grad_sum: g,
                    hess_sum: h,
                    best: None,
                };
                child.best = self.best_split(features, &child);
                open.push(child);
            }
        }
        build_node(&arena, 0)
    }
}

/// Sorted row indices of a candidate left child. Equal-gain splits are
/// decided by this key so the choice does not depend on column order.
fn left_rows_key(rows: &[u32]) -> Vec<u32> {
    let mut key = rows.to_vec();
    key.sort_unstable();
    key
}

fn build_node(arena: &[ArenaNode], idx: usize) -> TreeNode {
    match arena[idx] {
        ArenaNode::Leaf(value) => TreeNode::Leaf { value },
        ArenaNode::Split {
            feature,
            threshold,
            left,
            right,
        } => TreeNode::Split {
            feature,
            threshold,
            left: Box::new(build_node(arena, left)),
            right: Box::new(build_node(arena, right)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let (mut wins, mut pairs) = (0.0, 0.0);
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if labels[i] == 1 && labels[j] == 0 {
                    pairs += 1.0;
                    wins += if si > sj { 1.0 } else if si == sj { 0.5 } else { 0.0 };
                }
            }
        }
        wins / pairs
    }

    fn separable() -> (Matrix, Vec<u8>) {
        let xs: Vec<f64> = (0..200).map(|i| i as f64 - 99.5).collect();
        let labels = xs.iter().map(|&v| u8::from(v > 0.0)).collect();
        (Matrix::new(200, 1, xs).unwrap(), labels)
    }

    #[test]
    fn separable_data_reaches_perfect_training_auc() {
        let (x, y) = separable();
        let model = train_gbdt(&x, &y, &GbdtParams::default()).unwrap();
        let p = predict_gbdt(&model, &x).unwrap();
        assert_eq!(brute_auc(&p, &y), 1.0);
    }

    #[test]
    fn unit_weight_matches_class_prior() {
        // 90% negatives, feature carries no signal.
        let x = Matrix::new(500, 1, (0..500).map(|i| (i % 7) as f64).collect()).unwrap();
        let y: Vec<u8> = (0..500).map(|i| u8::from(i % 10 == 3)).collect();
        let params = GbdtParams {
            positive_class_weight: Some(1.0),
            ..Default::default()
        };
        let model = train_gbdt(&x, &y, &params).unwrap();
        let p = predict_gbdt(&model, &x).unwrap();
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        assert!((mean - 0.1).abs() <= 0.05, "{mean}");
    }

    #[test]
    fn same_seed_gives_identical_model_bytes() {
        let (x, y) = separable();
        let params = GbdtParams {
            feature_subsample: 0.5,
            rng_seed: 9,
            ..Default::default()
        };
        let wide = Matrix::from_rows(
            &(0..x.rows())
                .map(|i| vec![x.get(i, 0), (i % 5) as f64])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let a = train_gbdt(&wide, &y, &params).unwrap().to_json().unwrap();
        let b = train_gbdt(&wide, &y, &params).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        assert_eq!(GbdtModel::from_json(&a).unwrap().to_json().unwrap(), a);
    }

    #[test]
    fn single_split_tree_hand_trace() {
        // Four rows, one split at 1.5 after the first tree.
        let x = Matrix::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let y = [0, 0, 1, 1];
        let params = GbdtParams {
            n_trees: 1,
            min_samples_leaf: 1,
            max_leaves: 2,
            positive_class_weight: Some(1.0),
            ..Default::default()
        };
        let model = train_gbdt(&x, &y, &params).unwrap();
        assert_eq!(model.base_score, 0.0);
        // At raw 0: g = p - y = +-0.5, h = 0.25. Left leaf G = 1, H = 0.5.
        let leaf = 0.1 * 1.0 / (0.5 + 1.0);
        match &model.trees[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            other => panic!("expected a split, got {other:?}"),
        }
        let p = predict_gbdt(&model, &x).unwrap();
        assert_eq!(p[0], sigmoid(-leaf));
        assert_eq!(p[1], sigmoid(-leaf));
        assert_eq!(p[2], sigmoid(leaf));
        assert_eq!(p[3], sigmoid(leaf));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let x = Matrix::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(train_gbdt(&x, &[1, 1, 1], &GbdtParams::default()).is_err());
        assert!(train_gbdt(&x, &[0, 1], &GbdtParams::default()).is_err());
        let zero = GbdtParams {
            n_trees: 0,
            ..Default::default()
        };
        assert!(matches!(train_gbdt(&x, &[0, 1, 0], &zero), Err(Error::Config(_))));
        let (sx, sy) = separable();
        let model = train_gbdt(&sx, &sy, &GbdtParams::default()).unwrap();
        assert!(matches!(
            predict_gbdt(&model, &Matrix::zeros(1, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let eps = 1e-5;
        for &raw in &[-6.0, -1.3, 0.0, 0.7, 4.2] {
            for &(y, w) in &[(0.0, 1.0), (1.0, 1.0), (1.0, 7.5)] {
                let (g, h) = logistic_gradients(raw, y, w);
                let fd_g = (logistic_loss(raw + eps, y, w) - logistic_loss(raw - eps, y, w)) / (2.0 * eps);
                let fd_h = (logistic_gradients(raw + eps, y, w).0 - logistic_gradients(raw - eps, y, w).0) / (2.0 * eps);
                assert!((g - fd_g).abs() < 1e-6);
                assert!((h - fd_h).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn training_loss_never_increases(
            rows in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, any::<bool>()), 30..120),
        ) {
            let x = Matrix::from_rows(&rows.iter().map(|r| vec![r.0, r.1]).collect::<Vec<_>>()).unwrap();
            let mut y: Vec<u8> = rows.iter().map(|r| u8::from(r.2)).collect();
            y[0] = 0;
            y[1] = 1;
            let params = GbdtParams { n_trees: 30, min_samples_leaf: 3, ..Default::default() };
            let (_, history) = train_gbdt_traced(&x, &y, &params).unwrap();
            for w in history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
            }
        }

        #[test]
        fn predictions_are_open_unit_interval_and_row_order_free(
            rows in prop::collection::vec((-5.0f64..5.0, any::<bool>()), 10..60),
        ) {
            let x = Matrix::new(rows.len(), 1, rows.iter().map(|r| r.0).collect()).unwrap();
            let mut y: Vec<u8> = rows.iter().map(|r| u8::from(r.1)).collect();
            y[0] = 0;
            y[1] = 1;
            let params = GbdtParams { n_trees: 10, min_samples_leaf: 2, ..Default::default() };
            let model = train_gbdt(&x, &y, &params).unwrap();
            let p = predict_gbdt(&model, &x).unwrap();
            prop_assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
            let reversed: Vec<usize> = (0..x.rows()).rev().collect();
            let mut q = predict_gbdt(&model, &x.select_rows(&reversed)).unwrap();
            q.reverse();
            prop_assert_eq!(p, q);
        }

        #[test]
        fn column_permutation_gives_identical_predictions(
            rows in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, any::<bool>()), 20..80),
        ) {
            let data: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0, r.1, r.2]).collect();
            let x = Matrix::from_rows(&data).unwrap();
            let mut y: Vec<u8> = rows.iter().map(|r| u8::from(r.3)).collect();
            y[0] = 0;
            y[1] = 1;
            let params = GbdtParams { n_trees: 15, min_samples_leaf: 2, ..Default::default() };
            let a = predict_gbdt(&train_gbdt(&x, &y, &params).unwrap(), &x).unwrap();
            let perm = [2, 0, 1];
            let xp = x.select_columns(&perm);
            let b = predict_gbdt(&train_gbdt(&xp, &y, &params).unwrap(), &xp).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() < 1e-12, "{} vs {}", u, v);
            }
        }
    }
}
