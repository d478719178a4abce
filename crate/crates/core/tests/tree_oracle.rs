//! Tree growth checked against exhaustive enumeration and reference
//! equivalences between the ensemble kinds.

use proptest::prelude::*;
use rand::Rng;
use stockcast_core::rng::rng_from_seed;
use stockcast_core::trees::{
    fit_bagging, fit_decision_tree, fit_gradient_boosting, fit_random_forest, fit_xgb_like, Bootstrap,
    EnsembleParams, FeatureSubset, TreeNode,
};
use stockcast_core::Matrix;

fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// Weighted child variance (n_L·var_L + n_R·var_R) / n of splitting on `x[f] <= t`.
fn impurity(x: &Matrix, y: &[f64], f: usize, t: f64) -> f64 {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (i, &target) in y.iter().enumerate() {
        if x.get(i, f) <= t { left.push(target) } else { right.push(target) }
    }
    (sse(&left) + sse(&right)) / y.len() as f64
}

/// Minimum impurity over every (feature, midpoint) candidate.
fn exhaustive_best(x: &Matrix, y: &[f64]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for f in 0..x.cols() {
        let mut values: Vec<f64> = x.column(f).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let imp = impurity(x, y, f, (pair[0] + pair[1]) / 2.0);
            best = Some(best.map_or(imp, |b: f64| b.min(imp)));
        }
    }
    best
}

fn small_dataset(seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let rows = rng.random_range(2..=8);
    let cols = rng.random_range(1..=2);
    // integer-valued features so ties between rows occur
    let x: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(0..5) as f64).collect();
    let y: Vec<f64> = (0..rows).map(|_| rng.random_range(-10.0..10.0)).collect();
    (Matrix::new(rows, cols, x).unwrap(), y)
}

#[test]
fn root_split_is_the_exhaustive_optimum() {
    let mut checked = 0;
    for seed in 0..200 {
        let (x, y) = small_dataset(seed);
        let tree = fit_decision_tree(&x, &y, Some(1), FeatureSubset::All, 2, &mut rng_from_seed(0)).unwrap();
        match (tree.root(), exhaustive_best(&x, &y)) {
            (TreeNode::Split { feature, threshold, .. }, Some(best)) => {
                let chosen = impurity(&x, &y, *feature, *threshold);
                assert!((chosen - best).abs() <= 1e-9 * best.abs().max(1.0), "seed {seed}: {chosen} vs {best}");
                checked += 1;
            }
            (TreeNode::Leaf { .. }, None) => {}
            (TreeNode::Leaf { .. }, Some(best)) => {
                // only acceptable when no split improves on the parent
                assert!((sse(&y) / y.len() as f64 - best).abs() <= 1e-12, "seed {seed}");
            }
            (TreeNode::Split { .. }, None) => panic!("seed {seed}: split without candidates"),
        }
    }
    assert!(checked > 150);
}

fn random_regression(rows: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let x: Vec<f64> = (0..rows * 4).map(|_| rng.random_range(0.0..1.0)).collect();
    let m = Matrix::new(rows, 4, x).unwrap();
    let y = m
        .iter_rows()
        .map(|r| 3.0 * r[0] - 2.0 * r[1] * r[2] + (6.0 * r[3]).sin() + rng.random_range(-0.1..0.1))
        .collect();
    (m, y)
}

#[test]
fn unregularized_xgb_matches_gradient_boosting() {
    for seed in 0..20 {
        let (x, y) = random_regression(60, seed);
        let params = EnsembleParams { ntrees: 15, max_depth: Some(3), lambda: 0.0, gamma: 0.0, ..EnsembleParams::default() };
        let gb = fit_gradient_boosting(&x, &y, &params).unwrap().predict(&x).unwrap();
        let xgb = fit_xgb_like(&x, &y, &params).unwrap().predict(&x).unwrap();
        for (a, b) in gb.iter().zip(&xgb) {
            assert!((a - b).abs() <= 1e-9, "seed {seed}");
        }
    }
}

#[test]
fn boosting_training_error_never_increases() {
    let (x, y) = random_regression(80, 99);
    let params = EnsembleParams { ntrees: 40, max_depth: Some(3), ..EnsembleParams::default() };
    let model = fit_gradient_boosting(&x, &y, &params).unwrap();
    let mut last = f64::INFINITY;
    for stage in 0..=40 {
        let pred = model.predict_stages(&x, stage).unwrap();
        let rss: f64 = pred.iter().zip(&y).map(|(p, t)| (p - t) * (p - t)).sum();
        assert!(rss <= last + 1e-9, "stage {stage}");
        last = rss;
    }
}

#[test]
fn forest_beats_the_mean_predictor_on_training_data() {
    let (x, y) = random_regression(100, 5);
    let forest = fit_random_forest(&x, &y, &EnsembleParams { ntrees: 20, ..EnsembleParams::default() }).unwrap();
    let pred = forest.predict(&x).unwrap();
    let mse: f64 = pred.iter().zip(&y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64;
    assert!(mse <= sse(&y) / y.len() as f64);
}

#[test]
fn seeded_ensembles_are_reproducible() {
    let (x, y) = random_regression(50, 17);
    let params = EnsembleParams { ntrees: 5, seed: 77, ..EnsembleParams::default() };
    assert_eq!(fit_bagging(&x, &y, &params).unwrap(), fit_bagging(&x, &y, &params).unwrap());
    assert_eq!(fit_random_forest(&x, &y, &params).unwrap(), fit_random_forest(&x, &y, &params).unwrap());
    let other = EnsembleParams { seed: 78, ..params };
    assert_ne!(fit_bagging(&x, &y, &params).unwrap(), fit_bagging(&x, &y, &other).unwrap());
}

#[test]
fn fully_grown_tree_returns_the_training_leaf_mean() {
    // rows 1 and 2 share a feature value, so they end in the same leaf
    let x = Matrix::from_rows(1, &[[0.0], [1.0], [1.0], [2.0]]).unwrap();
    let y = vec![5.0, 2.0, 4.0, -1.0];
    let tree = fit_decision_tree(&x, &y, None, FeatureSubset::All, 2, &mut rng_from_seed(0)).unwrap();
    assert_eq!(tree.predict(&x).unwrap(), vec![5.0, 3.0, 3.0, -1.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn averaged_predictions_stay_within_target_range(seed in any::<u64>(), probe in prop::collection::vec(-1.0f64..2.0, 4)) {
        let (x, y) = random_regression(40, seed);
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let q = Matrix::new(1, 4, probe).unwrap();
        let tree = fit_decision_tree(&x, &y, Some(10), FeatureSubset::All, 2, &mut rng_from_seed(seed)).unwrap();
        let bag = fit_bagging(&x, &y, &EnsembleParams { ntrees: 4, seed, bootstrap: Bootstrap::Resample, ..EnsembleParams::default() }).unwrap();
        for p in tree.predict(&q).unwrap().into_iter().chain(bag.predict(&q).unwrap()) {
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }
}
