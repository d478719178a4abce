use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::ModelRng;

#[derive(Debug, Clone, PartialEq)]
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
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

/// Which features a node may split on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSubset {
    All,
    /// Draw this many distinct features afresh at every node.
    Random(usize),
}

/// Growth controls shared by plain CART and the second-order booster.
///
/// With `lambda = 0` and `gamma = 0` the split score reduces to the
/// squared-error reduction and leaves are target means, i.e. plain CART.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    /// `None` grows until nodes are pure or too small.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features: FeatureSubset,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Minimum gain required to keep a split.
    pub gamma: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: Some(10),
            min_samples_split: 2,
            features: FeatureSubset::All,
            lambda: 0.0,
            gamma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: TreeNode,
    n_features: usize,
}

/// A candidate split found during search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// `S_L²/(n_L+λ) + S_R²/(n_R+λ)`; larger is better.
    pub score: f64,
}

impl DecisionTree {
    /// Fits a regression tree to `y` on the rows of `x` listed in `rows`
    /// (duplicates allowed, as produced by bootstrap resampling).
    pub fn fit_on(
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
        config: &TreeConfig,
        rng: &mut ModelRng,
    ) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.rows(),
                right: y.len(),
            });
        }
        if rows.is_empty() || x.cols() == 0 {
            return Err(Error::EmptyData);
        }
        if config.lambda < 0.0 || config.gamma < 0.0 {
            return Err(Error::InvalidParameter("lambda and gamma must be non-negative"));
        }
        let mut grower = Grower {
            x,
            y,
            config,
            rng,
            scratch: Vec::with_capacity(rows.len()),
            feature_pool: (0..x.cols()).collect(),
        };
        let mut rows = rows.to_vec();
        let root = grower.grow(&mut rows, 0);
        Ok(Self {
            root,
            n_features: x.cols(),
        })
    }

    pub fn fit(x: &Matrix, y: &[f64], config: &TreeConfig, rng: &mut ModelRng) -> Result<Self> {
        let rows: Vec<usize> = (0..x.rows()).collect();
        Self::fit_on(x, y, &rows, config, rng)
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.root.predict_row(row)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.cols(),
            });
        }
        Ok(x.iter_rows().map(|r| self.predict_row(r)).collect())
    }
}

/// Plain CART with every feature considered at each node.
pub fn fit_decision_tree(
    x: &Matrix,
    y: &[f64],
    max_depth: Option<usize>,
    features: FeatureSubset,
    min_samples_split: usize,
    rng: &mut ModelRng,
) -> Result<DecisionTree> {
    let config = TreeConfig {
        max_depth,
        min_samples_split,
        features,
        ..TreeConfig::default()
    };
    DecisionTree::fit(x, y, &config, rng)
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    config: &'a TreeConfig,
    rng: &'a mut ModelRng,
    scratch: Vec<(f64, f64)>,
    feature_pool: Vec<usize>,
}

impl Grower<'_> {
    fn leaf_value(&self, rows: &[usize]) -> f64 {
        let first = self.y[rows[0]];
        if self.config.lambda == 0.0 && rows.iter().all(|&i| self.y[i] == first) {
            return first;
        }
        let sum: f64 = rows.iter().map(|&i| self.y[i]).sum();
        sum / (rows.len() as f64 + self.config.lambda)
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> TreeNode {
        let leaf = TreeNode::Leaf {
            value: self.leaf_value(rows),
        };
        let depth_exhausted = self.config.max_depth.is_some_and(|d| depth >= d);
        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&i| self.y[i] == first);
        if depth_exhausted || pure || rows.len() < self.config.min_samples_split.max(2) {
            return leaf;
        }

        let Some(choice) = self.best_split(rows) else {
            return leaf;
        };
        let lambda = self.config.lambda;
        let total: f64 = rows.iter().map(|&i| self.y[i]).sum();
        let parent_score = total * total / (rows.len() as f64 + lambda);
        let gain = 0.5 * (choice.score - parent_score) - self.config.gamma;
        if !(gain > 0.0) {
            return leaf;
        }

        let x = self.x;
        let split_at = partition(rows, |&i| x.get(i, choice.feature) <= choice.threshold);
        let (left_rows, right_rows) = rows.split_at_mut(split_at);
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        TreeNode::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn candidate_features(&mut self) -> usize {
        let p = self.feature_pool.len();
        match self.config.features {
            FeatureSubset::Random(k) if k < p => {
                let k = k.max(1);
                // partial Fisher-Yates over a pool reset to 0..p
                for (j, slot) in self.feature_pool.iter_mut().enumerate() {
                    *slot = j;
                }
                for j in 0..k {
                    let pick = self.rng.random_range(j..p);
                    self.feature_pool.swap(j, pick);
                }
                self.feature_pool[..k].sort_unstable();
                k
            }
            _ => {
                for (j, slot) in self.feature_pool.iter_mut().enumerate() {
                    *slot = j;
                }
                p
            }
        }
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<SplitChoice> {
        let k = self.candidate_features();
        let mut best: Option<SplitChoice> = None;
        for fi in 0..k {
            let feature = self.feature_pool[fi];
            self.scratch.clear();
            self.scratch
                .extend(rows.iter().map(|&i| (self.x.get(i, feature), self.y[i])));
            if let Some(c) = best_split_on_sorted(&mut self.scratch, feature, self.config.lambda) {
                if best.is_none_or(|b| improves(c.score, b.score)) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

/// Strictly better by more than rounding noise, so exact ties keep the
/// earlier (lower feature, lower threshold) candidate.
#[inline]
fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent + 1e-12 * incumbent.abs()
}

/// Scans midpoints between consecutive distinct values of one feature.
fn best_split_on_sorted(pairs: &mut [(f64, f64)], feature: usize, lambda: f64) -> Option<SplitChoice> {
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut left_sum = 0.0;
    let mut best: Option<SplitChoice> = None;
    for i in 1..n {
        left_sum += pairs[i - 1].1;
        let (lo, hi) = (pairs[i - 1].0, pairs[i].0);
        if lo == hi {
            continue;
        }
        let right_sum = total - left_sum;
        let n_left = i as f64;
        let n_right = (n - i) as f64;
        let score = left_sum * left_sum / (n_left + lambda) + right_sum * right_sum / (n_right + lambda);
        if best.is_none_or(|b| improves(score, b.score)) {
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            best = Some(SplitChoice {
                feature,
                threshold,
                score,
            });
        }
    }
    best
}

/// Stable-order-agnostic in-place partition; returns the count satisfying `pred`.
fn partition<T, F: Fn(&T) -> bool>(items: &mut [T], pred: F) -> usize {
    let mut next = 0;
    for i in 0..items.len() {
        if pred(&items[i]) {
            items.swap(next, i);
            next += 1;
        }
    }
    next
}
