use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::tree::{DecisionTree, FeatureSubset, TreeConfig};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_from_seed, ModelRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnsembleKind {
    Single,
    Bagging,
    RandomForest,
    AdaBoostR2,
    GradientBoosting,
    XgbLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bootstrap {
    /// `N` draws with replacement.
    Resample,
    /// Every tree sees the training rows as given.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub ntrees: usize,
    pub max_depth: Option<usize>,
    /// Shrinkage for boosting; AdaBoost.R2 also uses it in its reweighting.
    pub learning_rate: f64,
    pub seed: u64,
    /// Fraction of features drawn per node (random forest only).
    pub feature_subsample: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub bootstrap: Bootstrap,
    pub min_samples_split: usize,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            ntrees: 100,
            max_depth: Some(10),
            learning_rate: 0.1,
            seed: 0,
            feature_subsample: 1.0 / 3.0,
            lambda: 1.0,
            gamma: 0.0,
            bootstrap: Bootstrap::Resample,
            min_samples_split: 2,
        }
    }
}

impl EnsembleParams {
    fn cart(&self) -> TreeConfig {
        TreeConfig {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            features: FeatureSubset::All,
            lambda: 0.0,
            gamma: 0.0,
        }
    }

    /// `⌈fraction · p⌉`, at least one feature.
    pub fn features_per_split(&self, p: usize) -> usize {
        let k = libm::ceil(self.feature_subsample * p as f64 - 1e-9) as usize;
        k.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    kind: EnsembleKind,
    trees: Vec<DecisionTree>,
    /// AdaBoost.R2 confidence weights; empty for other kinds.
    tree_weights: Vec<f64>,
    base_score: f64,
    learning_rate: f64,
    n_features: usize,
}

/// Mean that is exact when all values are equal.
fn anchored_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else {
        return 0.0;
    };
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + (v - first), n + 1));
    first + sum / n as f64
}

fn check_xy(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if y.is_empty() || x.cols() == 0 {
        return Err(Error::EmptyData);
    }
    Ok(())
}

fn bootstrap_rows(n: usize, mode: Bootstrap, rng: &mut ModelRng) -> Vec<usize> {
    match mode {
        Bootstrap::Identity => (0..n).collect(),
        Bootstrap::Resample => (0..n).map(|_| rng.random_range(0..n)).collect(),
    }
}

fn averaged_trees(
    kind: EnsembleKind,
    x: &Matrix,
    y: &[f64],
    params: &EnsembleParams,
    config: TreeConfig,
) -> Result<TreeEnsemble> {
    check_xy(x, y)?;
    if params.ntrees == 0 {
        return Err(Error::InvalidParameter("ntrees must be at least 1"));
    }
    let trees = (0..params.ntrees)
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(params.seed, t as u64));
            let rows = bootstrap_rows(y.len(), params.bootstrap, &mut rng);
            DecisionTree::fit_on(x, y, &rows, &config, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TreeEnsemble {
        kind,
        trees,
        tree_weights: Vec::new(),
        base_score: 0.0,
        learning_rate: 1.0,
        n_features: x.cols(),
    })
}

/// One unbagged CART tree, capped at `params.max_depth`.
pub fn fit_single_tree(x: &Matrix, y: &[f64], params: &EnsembleParams) -> Result<TreeEnsemble> {
    check_xy(x, y)?;
    let mut rng = rng_from_seed(params.seed);
    let tree = DecisionTree::fit(x, y, &params.cart(), &mut rng)?;
    Ok(TreeEnsemble {
        kind: EnsembleKind::Single,
        trees: vec![tree],
        tree_weights: Vec::new(),
        base_score: 0.0,
        learning_rate: 1.0,
        n_features: x.cols(),
    })
}

/// Bootstrap aggregation of full-feature CART trees.
pub fn fit_bagging(x: &Matrix, y: &[f64], params: &EnsembleParams) -> Result<TreeEnsemble> {
    averaged_trees(EnsembleKind::Bagging, x, y, params, params.cart())
}

/// Bagging with a fresh random feature subset drawn at every node.
pub fn fit_random_forest(x: &Matrix, y: &[f64], params: &EnsembleParams) -> Result<TreeEnsemble> {
    check_xy(x, y)?;
    let config = TreeConfig {
        features: FeatureSubset::Random(params.features_per_split(x.cols())),
        ..params.cart()
    };
    averaged_trees(EnsembleKind::RandomForest, x, y, params, config)
}

/// Draws `n` indices with probability proportional to `weights`.
fn weighted_rows(weights: &[f64], rng: &mut ModelRng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cdf.push(acc);
    }
    (0..weights.len())
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(weights.len() - 1)
        })
        .collect()
}

/// AdaBoost.R2 with the linear loss.
///
/// Each round fits a tree on a weight-proportional resample, scores every
/// training row by `|error| / max |error|`, and down-weights rows in
/// proportion to `β^(lr·(1 − loss))`. Rounds stop early on a perfect tree or
/// once the weighted loss reaches one half.
pub fn fit_adaboost_r2(x: &Matrix, y: &[f64], params: &EnsembleParams) -> Result<TreeEnsemble> {
    check_xy(x, y)?;
    if params.ntrees == 0 {
        return Err(Error::InvalidParameter("ntrees must be at least 1"));
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::InvalidParameter("learning_rate must be positive"));
    }
    let n = y.len();
    let config = params.cart();
    let mut rng = rng_from_seed(params.seed);
    let mut weights = vec![1.0 / n as f64; n];
    let mut trees = Vec::new();
    let mut tree_weights = Vec::new();

    for round in 0..params.ntrees {
        let rows = match params.bootstrap {
            Bootstrap::Identity => (0..n).collect(),
            Bootstrap::Resample => weighted_rows(&weights, &mut rng),
        };
        let tree = DecisionTree::fit_on(x, y, &rows, &config, &mut rng)?;
        let errors: Vec<f64> = x
            .iter_rows()
            .zip(y)
            .map(|(row, &target)| (tree.predict_row(row) - target).abs())
            .collect();
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        let losses: Vec<f64> = if max_error > 0.0 {
            errors.iter().map(|e| e / max_error).collect()
        } else {
            vec![0.0; n]
        };
        let avg_loss: f64 = weights.iter().zip(&losses).map(|(w, l)| w * l).sum();

        if avg_loss <= 0.0 {
            trees.push(tree);
            tree_weights.push(1.0);
            break;
        }
        if avg_loss >= 0.5 {
            if trees.is_empty() {
                trees.push(tree);
                tree_weights.push(1.0);
            }
            break;
        }
        let beta = avg_loss / (1.0 - avg_loss);
        trees.push(tree);
        tree_weights.push(params.learning_rate * libm::log(1.0 / beta));

        if round + 1 == params.ntrees {
            break;
        }
        for (w, l) in weights.iter_mut().zip(&losses) {
            *w *= libm::pow(beta, params.learning_rate * (1.0 - l));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateWeighting);
        }
        weights.iter_mut().for_each(|w| *w /= total);
    }

    Ok(TreeEnsemble {
        kind: EnsembleKind::AdaBoostR2,
        trees,
        tree_weights,
        base_score: 0.0,
        learning_rate: params.learning_rate,
        n_features: x.cols(),
    })
}

fn boosted(
    kind: EnsembleKind,
    x: &Matrix,
    y: &[f64],
    params: &EnsembleParams,
    config: TreeConfig,
) -> Result<TreeEnsemble> {
    check_xy(x, y)?;
    let base_score = anchored_mean(y.iter().copied());
    let mut current = vec![base_score; y.len()];
    let mut residuals = vec![0.0; y.len()];
    let mut rng = rng_from_seed(params.seed);
    let mut trees = Vec::with_capacity(params.ntrees);
    for _ in 0..params.ntrees {
        // negative gradient of ½(y − F)²
        for ((r, &target), &f) in residuals.iter_mut().zip(y).zip(&current) {
            *r = target - f;
        }
        let tree = DecisionTree::fit(x, &residuals, &config, &mut rng)?;
        for (f, row) in current.iter_mut().zip(x.iter_rows()) {
            *f += params.learning_rate * tree.predict_row(row);
        }
        trees.push(tree);
    }
    Ok(TreeEnsemble {
        kind,
        trees,
        tree_weights: Vec::new(),
        base_score,
        learning_rate: params.learning_rate,
        n_features: x.cols(),
    })
}

/// Squared-loss gradient boosting: start from `mean(y)`, then add shrunken
/// CART fits of the current residuals.
pub fn fit_gradient_boosting(x: &Matrix, y: &[f64], params: &EnsembleParams) -> Result<TreeEnsemble> {
    boosted(EnsembleKind::GradientBoosting, x, y, params, params.cart())
}

/// Second-order boosting with L2 leaf penalty `lambda` and split penalty
/// `gamma`. For squared loss the hessian is 1, so a leaf holding residual
/// sum `S` over `n` rows takes `S / (n + λ)` and a split must gain more
/// than `γ`.
pub fn fit_xgb_like(x: &Matrix, y: &[f64], params: &EnsembleParams) -> Result<TreeEnsemble> {
    let config = TreeConfig {
        lambda: params.lambda,
        gamma: params.gamma,
        ..params.cart()
    };
    boosted(EnsembleKind::XgbLike, x, y, params, config)
}

pub fn fit_ensemble(
    kind: EnsembleKind,
    x: &Matrix,
    y: &[f64],
    params: &EnsembleParams,
) -> Result<TreeEnsemble> {
    match kind {
        EnsembleKind::Single => fit_single_tree(x, y, params),
        EnsembleKind::Bagging => fit_bagging(x, y, params),
        EnsembleKind::RandomForest => fit_random_forest(x, y, params),
        EnsembleKind::AdaBoostR2 => fit_adaboost_r2(x, y, params),
        EnsembleKind::GradientBoosting => fit_gradient_boosting(x, y, params),
        EnsembleKind::XgbLike => fit_xgb_like(x, y, params),
    }
}

/// Lower weighted median: the smallest value whose cumulative weight reaches
/// half of the total.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for &(v, w) in &pairs {
        acc += w;
        if acc >= 0.5 * total {
            return v;
        }
    }
    pairs.last().map_or(0.0, |p| p.0)
}

impl TreeEnsemble {
    /// An ensemble with no fitted trees, predicting `base_score` everywhere.
    pub fn constant(kind: EnsembleKind, base_score: f64, n_features: usize) -> Self {
        Self {
            kind,
            trees: Vec::new(),
            tree_weights: Vec::new(),
            base_score,
            learning_rate: 1.0,
            n_features,
        }
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree_weights(&self) -> &[f64] {
        &self.tree_weights
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_row_staged(row, self.trees.len())
    }

    fn predict_row_staged(&self, row: &[f64], stages: usize) -> f64 {
        let trees = &self.trees[..stages.min(self.trees.len())];
        match self.kind {
            EnsembleKind::GradientBoosting | EnsembleKind::XgbLike => {
                let mut f = self.base_score;
                for t in trees {
                    f += self.learning_rate * t.predict_row(row);
                }
                f
            }
            _ if trees.is_empty() => self.base_score,
            EnsembleKind::Single | EnsembleKind::Bagging | EnsembleKind::RandomForest => {
                anchored_mean(trees.iter().map(|t| t.predict_row(row)))
            }
            EnsembleKind::AdaBoostR2 => {
                let outputs: Vec<f64> = trees.iter().map(|t| t.predict_row(row)).collect();
                weighted_median(&outputs, &self.tree_weights[..trees.len()])
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.predict_stages(x, self.trees.len())
    }

    /// Prediction using only the first `stages` trees.
    pub fn predict_stages(&self, x: &Matrix, stages: usize) -> Result<Vec<f64>> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.cols(),
            });
        }
        Ok(x.iter_rows().map(|r| self.predict_row_staged(r, stages)).collect())
    }
}
