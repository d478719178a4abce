//! CART regression trees and the ensembles built from them: bagging,
//! random forest, AdaBoost.R2, gradient boosting and a second-order
//! (XGBoost-style) booster.

mod ensemble;
mod tree;

pub use ensemble::{
    fit_adaboost_r2, fit_bagging, fit_ensemble, fit_gradient_boosting, fit_random_forest,
    fit_single_tree, fit_xgb_like, weighted_median, Bootstrap, EnsembleKind, EnsembleParams,
    TreeEnsemble,
};
pub use tree::{fit_decision_tree, DecisionTree, FeatureSubset, SplitChoice, TreeConfig, TreeNode};
