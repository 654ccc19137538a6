//! Second-order gradient-boosted regression trees on logistic loss.
//!
//! Exact greedy splitter, grown level by level: every feature column is
//! presorted once per fit, and each level walks each candidate column in
//! one pass, accumulating per-node gradient/hessian prefixes. Split gain is
//!
//!   G_L^2/(H_L+λ) + G_R^2/(H_R+λ) - G^2/(H+λ) - γ    (λ = 1)
//!
//! A node splits only when the best gain is positive and both children
//! carry at least `min_child_weight` of hessian mass.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng::{stream_key, CounterRng};

use super::GbtConfig;

/// L2 regularization of the leaf weights.
pub(crate) const REG_LAMBDA: f64 = 1.0;

const LEAF: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node {
    /// Split feature, or `LEAF`.
    feature: u32,
    /// Rows with value < threshold go left.
    threshold: f64,
    left: u32,
    right: u32,
    /// Leaf weight (shrinkage already applied); 0 for internal nodes.
    value: f64,
}

#[derive(Clone, Debug)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            let node = &self.nodes[at];
            if node.feature == LEAF {
                return node.value;
            }
            at = if row[node.feature as usize] < node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

}

/// Presorted column-major training data.
pub(crate) struct DenseData {
    pub n_rows: usize,
    pub cols: Vec<Vec<f64>>,
    sorted_idx: Vec<Vec<u32>>,
}

impl DenseData {
    pub fn new(cols: Vec<Vec<f64>>) -> Self {
        let n_rows = cols.first().map_or(0, Vec::len);
        let sorted_idx = cols
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n_rows as u32).collect();
                idx.sort_unstable_by(|&a, &b| {
                    col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b))
                });
                idx
            })
            .collect();
        DenseData { n_rows, cols, sorted_idx }
    }
}

/// The boosted ensemble.
#[derive(Clone, Debug)]
pub struct GbtModel {
    pub(crate) base_score: f64,
    pub(crate) trees: Vec<Tree>,
    pub(crate) n_features: usize,
}

impl GbtModel {
    /// Raw additive margin (log-odds scale).
    pub fn predict_margin(&self, row: &[f64]) -> f64 {
        self.margin_at_round(row, self.trees.len())
    }

    /// Margin after only the first `rounds` trees.
    pub fn margin_at_round(&self, row: &[f64], rounds: usize) -> f64 {
        debug_assert_eq!(row.len(), self.n_features);
        let mut margin = self.base_score;
        for tree in &self.trees[..rounds.min(self.trees.len())] {
            margin += tree.predict(row);
        }
        margin
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.predict_margin(row))
    }

    /// Positive class (margin >= 0) is the patient label.
    pub fn predict_positive(&self, row: &[f64]) -> bool {
        self.predict_margin(row) >= 0.0
    }

    pub fn n_rounds(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Draws `k` distinct items from 0..n (ascending order) via a partial
/// Fisher-Yates shuffle.
fn sample_without_replacement(rng: &mut CounterRng, n: usize, k: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..n as u32).collect();
    for i in 0..k {
        let j = i + rng.below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut chosen = pool[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

fn subset_size(ratio: f64, n: usize) -> usize {
    if ratio >= 1.0 {
        n
    } else {
        ((ratio * n as f64) as usize).clamp(1, n)
    }
}

/// Fits the boosted ensemble. `y` holds 0/1 targets; the base score is the
/// weighted prior log-odds, so a gain threshold nothing can clear yields
/// all-stump trees that keep predicting the prior.
pub(crate) fn fit(data: &DenseData, y: &[f64], cfg: &GbtConfig) -> GbtModel {
    let n = data.n_rows;
    let p = data.cols.len();
    let n_pos: f64 = y.iter().sum();
    let n_neg = n as f64 - n_pos;
    let spw = cfg.scale_pos_weight;
    let base_score = libm::log(spw * n_pos / n_neg);

    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(cfg.n_estimators);

    for tree_index in 0..cfg.n_estimators {
        for i in 0..n {
            let prob = sigmoid(margins[i]);
            let w = if y[i] == 1.0 { spw } else { 1.0 };
            grad[i] = w * (prob - y[i]);
            hess[i] = w * prob * (1.0 - prob);
        }
        let mut rng = CounterRng::new(stream_key(&[cfg.seed, tree_index as u64]));
        let tree = grow_tree(data, &grad, &hess, cfg, &mut rng);
        for (i, margin) in margins.iter_mut().enumerate() {
            *margin += predict_in_columns(&tree, data, i);
        }
        trees.push(tree);
    }

    GbtModel { base_score, trees, n_features: p }
}

fn predict_in_columns(tree: &Tree, data: &DenseData, row: usize) -> f64 {
    let mut at = 0usize;
    loop {
        let node = &tree.nodes[at];
        if node.feature == LEAF {
            return node.value;
        }
        at = if data.cols[node.feature as usize][row] < node.threshold {
            node.left as usize
        } else {
            node.right as usize
        };
    }
}

struct NodeStats {
    grad: f64,
    hess: f64,
    rows: usize,
}

struct BestSplit {
    gain: f64,
    feature: u32,
    threshold: f64,
}

fn grow_tree(
    data: &DenseData,
    grad: &[f64],
    hess: &[f64],
    cfg: &GbtConfig,
    rng: &mut CounterRng,
) -> Tree {
    let n = data.n_rows;
    let p = data.cols.len();

    // Row subsample for this tree's gradient statistics.
    let sampled_rows: Vec<u32> = if cfg.subsample >= 1.0 {
        (0..n as u32).collect()
    } else {
        sample_without_replacement(rng, n, subset_size(cfg.subsample, n))
    };
    // Column subsample for this tree.
    let tree_features: Vec<u32> = if cfg.colsample_bytree >= 1.0 {
        (0..p as u32).collect()
    } else {
        sample_without_replacement(rng, p, subset_size(cfg.colsample_bytree, p))
    };

    const OUT: u32 = u32::MAX;
    let mut node_of_row = vec![OUT; n];
    let mut root = NodeStats { grad: 0.0, hess: 0.0, rows: 0 };
    for &r in &sampled_rows {
        node_of_row[r as usize] = 0;
        root.grad += grad[r as usize];
        root.hess += hess[r as usize];
        root.rows += 1;
    }

    // A node can only split when both children could carry min_child_weight
    // and it holds at least two rows; filtering here skips whole column
    // scans once the hessian mass collapses in late boosting rounds.
    let splittable = |s: &NodeStats| s.rows >= 2 && s.hess >= 2.0 * cfg.min_child_weight;

    let mut stats = vec![root];
    let mut splits: Vec<Option<BestSplit>> = vec![None];
    let mut children: Vec<(u32, u32)> = vec![(LEAF, LEAF)];
    let mut active: Vec<u32> = if splittable(&stats[0]) { vec![0] } else { Vec::new() };

    for _depth in 0..cfg.max_depth {
        if active.is_empty() {
            break;
        }
        // Column subsample for this level, drawn from the tree's set.
        let level_features: Vec<u32> = if cfg.colsample_bylevel >= 1.0 {
            tree_features.clone()
        } else {
            let k = subset_size(cfg.colsample_bylevel, tree_features.len());
            sample_without_replacement(rng, tree_features.len(), k)
                .into_iter()
                .map(|i| tree_features[i as usize])
                .collect()
        };

        // slot of each active node for the per-level accumulators
        let mut slot_of_node = vec![usize::MAX; stats.len()];
        for (slot, &node) in active.iter().enumerate() {
            slot_of_node[node as usize] = slot;
        }
        let k = active.len();
        let mut best: Vec<Option<BestSplit>> = (0..k).map(|_| None).collect();
        let mut acc_g = vec![0.0; k];
        let mut acc_h = vec![0.0; k];
        let mut prev = vec![0.0; k];
        let mut seen = vec![false; k];

        for &f in &level_features {
            for s in 0..k {
                acc_g[s] = 0.0;
                acc_h[s] = 0.0;
                seen[s] = false;
            }
            let col = &data.cols[f as usize];
            for &r in &data.sorted_idx[f as usize] {
                let node = node_of_row[r as usize];
                if node == OUT {
                    continue;
                }
                let slot = slot_of_node[node as usize];
                if slot == usize::MAX {
                    continue;
                }
                let value = col[r as usize];
                if seen[slot] && value > prev[slot] {
                    let total = &stats[active[slot] as usize];
                    let (gl, hl) = (acc_g[slot], acc_h[slot]);
                    let (gr, hr) = (total.grad - gl, total.hess - hl);
                    if hl >= cfg.min_child_weight && hr >= cfg.min_child_weight {
                        let gain = gl * gl / (hl + REG_LAMBDA) + gr * gr / (hr + REG_LAMBDA)
                            - total.grad * total.grad / (total.hess + REG_LAMBDA)
                            - cfg.gamma;
                        let better = match &best[slot] {
                            Some(b) => gain > b.gain,
                            None => gain > 0.0,
                        };
                        if better {
                            best[slot] = Some(BestSplit { gain, feature: f, threshold: value });
                        }
                    }
                }
                acc_g[slot] += grad[r as usize];
                acc_h[slot] += hess[r as usize];
                prev[slot] = value;
                seen[slot] = true;
            }
        }

        // Materialize the accepted splits and partition the rows.
        let mut created = Vec::new();
        for (slot, &node) in active.iter().enumerate() {
            if let Some(split) = best[slot].take() {
                let left = stats.len() as u32;
                let right = left + 1;
                stats.push(NodeStats { grad: 0.0, hess: 0.0, rows: 0 });
                stats.push(NodeStats { grad: 0.0, hess: 0.0, rows: 0 });
                splits.push(None);
                splits.push(None);
                children.push((LEAF, LEAF));
                children.push((LEAF, LEAF));
                children[node as usize] = (left, right);
                splits[node as usize] = Some(split);
                created.push(left);
                created.push(right);
            }
        }
        if created.is_empty() {
            break;
        }
        for r in 0..n {
            let node = node_of_row[r];
            if node == OUT {
                continue;
            }
            if let Some(split) = &splits[node as usize] {
                let (left, right) = children[node as usize];
                let child = if data.cols[split.feature as usize][r] < split.threshold {
                    left
                } else {
                    right
                };
                node_of_row[r] = child;
                stats[child as usize].grad += grad[r];
                stats[child as usize].hess += hess[r];
                stats[child as usize].rows += 1;
            }
        }
        active = created
            .into_iter()
            .filter(|&c| splittable(&stats[c as usize]))
            .collect();
    }

    let nodes: Vec<Node> = (0..stats.len())
        .map(|i| match &splits[i] {
            Some(split) => Node {
                feature: split.feature,
                threshold: split.threshold,
                left: children[i].0,
                right: children[i].1,
                value: 0.0,
            },
            None => Node {
                feature: LEAF,
                threshold: 0.0,
                left: LEAF,
                right: LEAF,
                value: -cfg.learning_rate * stats[i].grad / (stats[i].hess + REG_LAMBDA),
            },
        })
        .collect();
    Tree { nodes }
}
