//! CART regression tree with transparent, path-based local explanations.
//!
//! The tree is grown greedily (best or random splits, optional feature
//! subsampling) and every prediction walks a single root-to-leaf path. A
//! local explanation credits each split feature on that path with the
//! impurity change it caused, which makes the explanation an exact artifact
//! of the model — the property the perfect explanation test relies on.

mod explainer;
mod fit;
mod impurity;
mod model;

pub use explainer::TreeExplainer;
pub use fit::fit_tree;
pub use impurity::{impurity, Criterion};
pub use model::{
    ImportanceMode, LocalExplanation, MaxFeatures, RegressionTree, Split, Splitter,
    TreeHyperParams, TreeNode, TREE_FORMAT_VERSION,
};
