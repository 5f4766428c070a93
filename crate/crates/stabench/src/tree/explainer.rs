//! Adapters exposing a fitted tree as an explainer and predictor for the
//! robustness metrics.

use crate::error::Result;
use crate::metrics::{Explainer, Predictor};
use crate::tree::model::{ImportanceMode, RegressionTree};

/// Wraps a tree so its path-based local explanations feed the metrics.
#[derive(Debug, Clone)]
pub struct TreeExplainer<'a> {
    tree: &'a RegressionTree,
    mode: ImportanceMode,
}

impl<'a> TreeExplainer<'a> {
    pub fn new(tree: &'a RegressionTree) -> Self {
        Self {
            tree,
            mode: ImportanceMode::default(),
        }
    }

    pub fn with_mode(tree: &'a RegressionTree, mode: ImportanceMode) -> Self {
        Self { tree, mode }
    }
}

impl Explainer for TreeExplainer<'_> {
    fn explain(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.tree.explain_local_with(x, self.mode)?.relevance)
    }
}

impl Predictor for RegressionTree {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        RegressionTree::predict(self, x)
    }
}
