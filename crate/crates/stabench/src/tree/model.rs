//! Tree structure, routing, local explanations, and JSON serialization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::impurity::Criterion;

/// Version tag of the JSON tree format.
pub const TREE_FORMAT_VERSION: u32 = 1;

/// Split strategy: exhaustive midpoint search or one random threshold per
/// candidate feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    Best,
    Random,
}

impl std::fmt::Display for Splitter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Splitter::Best => "best",
            Splitter::Random => "random",
        })
    }
}

/// How many candidate features each node considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// Every feature.
    All,
    /// `ceil(sqrt(n_features))`, drawn without replacement.
    Sqrt,
    /// `ceil(log2(n_features))`, drawn without replacement.
    Log2,
}

impl MaxFeatures {
    /// Number of candidate features for a `d`-dimensional input.
    pub fn count(self, d: usize) -> usize {
        let k = match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::Log2 => (d as f64).log2().ceil() as usize,
        };
        k.clamp(1, d)
    }
}

impl std::fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MaxFeatures::All => "all",
            MaxFeatures::Sqrt => "sqrt",
            MaxFeatures::Log2 => "log2",
        })
    }
}

/// Growth hyperparameters. The defaults are the reference configuration used
/// throughout the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeHyperParams {
    pub criterion: Criterion,
    pub splitter: Splitter,
    /// `None` grows until purity (or until nodes run out of samples).
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeHyperParams {
    fn default() -> Self {
        Self {
            criterion: Criterion::Poisson,
            splitter: Splitter::Best,
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::Log2,
        }
    }
}

impl TreeHyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split == 0 {
            return Err(Error::Config("min_samples_split must be at least 1".into()));
        }
        Ok(())
    }
}

/// Internal split: route `x[feature] <= threshold` to `left`, else `right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

/// One arena node; a leaf when `split` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub impurity: f64,
    pub n_samples: usize,
    /// Mean target of the node's training samples (the prediction, for leaves).
    pub value: f64,
    pub split: Option<Split>,
}

/// Feature relevances of a single prediction; same length as the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalExplanation {
    pub relevance: Vec<f64>,
}

/// How path relevances are accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMode {
    /// `|impurity(parent) - impurity(taken child)|` per path step.
    #[default]
    Unweighted,
    /// Sample-weighted impurity decrease of each split on the path.
    Weighted,
}

/// Fitted CART regression tree (node arena, root at index `root`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub format_version: u32,
    pub n_features: usize,
    pub root: usize,
    pub seed: u64,
    pub params: TreeHyperParams,
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of leaves.
    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }

    /// Maximum root-to-leaf depth (a lone root has depth 0).
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            best = best.max(d);
            if let Some(s) = &self.nodes[id].split {
                stack.push((s.left, d + 1));
                stack.push((s.right, d + 1));
            }
        }
        best
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::Domain(format!(
                "input has {} features, tree expects {}",
                x.len(),
                self.n_features
            )));
        }
        Ok(())
    }

    /// Node ids on the root-to-leaf path taken by `x`.
    pub fn decision_path(&self, x: &[f64]) -> Result<Vec<usize>> {
        self.check_input(x)?;
        let mut path = vec![self.root];
        let mut id = self.root;
        while let Some(s) = &self.nodes[id].split {
            id = if x[s.feature] <= s.threshold {
                s.left
            } else {
                s.right
            };
            path.push(id);
        }
        Ok(path)
    }

    /// Mean target of the leaf reached by `x`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.nodes[*self.decision_path(x)?.last().unwrap()].value)
    }

    /// Local explanation of `predict(x)` with the default unweighted
    /// accumulation.
    pub fn explain_local(&self, x: &[f64]) -> Result<LocalExplanation> {
        self.explain_local_with(x, ImportanceMode::Unweighted)
    }

    /// Local explanation: walks the decision path and credits each split
    /// feature with the impurity change it caused. Off-path features get
    /// exactly zero, so the explanation is a pure function of the path.
    pub fn explain_local_with(&self, x: &[f64], mode: ImportanceMode) -> Result<LocalExplanation> {
        let path = self.decision_path(x)?;
        let mut relevance = vec![0.0; self.n_features];
        for pair in path.windows(2) {
            let parent = &self.nodes[pair[0]];
            let child = &self.nodes[pair[1]];
            let split = parent
                .split
                .as_ref()
                .expect("non-terminal path node has a split");
            let credit = match mode {
                ImportanceMode::Unweighted => (parent.impurity - child.impurity).abs(),
                ImportanceMode::Weighted => {
                    let l = &self.nodes[split.left];
                    let r = &self.nodes[split.right];
                    let weighted = (l.n_samples as f64 * l.impurity
                        + r.n_samples as f64 * r.impurity)
                        / parent.n_samples as f64;
                    (parent.impurity - weighted).abs()
                }
            };
            relevance[split.feature] += credit;
        }
        Ok(LocalExplanation { relevance })
    }

    /// Serializes to versioned JSON. `from_json` restores the exact tree:
    /// floats survive the round trip bit for bit.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and structurally validates a JSON tree.
    pub fn from_json(json: &str) -> Result<Self> {
        let tree: RegressionTree = serde_json::from_str(json)?;
        if tree.format_version != TREE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported tree format version {} (expected {TREE_FORMAT_VERSION})",
                tree.format_version
            )));
        }
        tree.validate()?;
        Ok(tree)
    }

    /// Checks arena integrity: ids in range, exactly one parent per non-root
    /// node, no cycles or orphans, sane split payloads.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::Format("tree has no nodes".into()));
        }
        if self.root >= n {
            return Err(Error::Format(format!("root id {} out of range", self.root)));
        }
        if self.n_features == 0 {
            return Err(Error::Format("tree must have at least one feature".into()));
        }
        let mut parents = vec![0usize; n];
        for (id, node) in self.nodes.iter().enumerate() {
            if !node.impurity.is_finite() || node.impurity < 0.0 {
                return Err(Error::Format(format!(
                    "node {id}: bad impurity {}",
                    node.impurity
                )));
            }
            if !node.value.is_finite() {
                return Err(Error::Format(format!("node {id}: non-finite value")));
            }
            if node.n_samples == 0 {
                return Err(Error::Format(format!("node {id}: zero samples")));
            }
            if let Some(s) = &node.split {
                if s.feature >= self.n_features {
                    return Err(Error::Format(format!(
                        "node {id}: split feature {} out of range",
                        s.feature
                    )));
                }
                if !s.threshold.is_finite() {
                    return Err(Error::Format(format!("node {id}: non-finite threshold")));
                }
                if s.left >= n || s.right >= n || s.left == s.right {
                    return Err(Error::Format(format!("node {id}: bad child ids")));
                }
                if s.left == id || s.right == id {
                    return Err(Error::Format(format!("node {id}: self-referential split")));
                }
                parents[s.left] += 1;
                parents[s.right] += 1;
                let kids = self.nodes[s.left].n_samples + self.nodes[s.right].n_samples;
                if kids != node.n_samples {
                    return Err(Error::Format(format!(
                        "node {id}: children cover {kids} samples, parent has {}",
                        node.n_samples
                    )));
                }
            }
        }
        if parents[self.root] != 0 {
            return Err(Error::Format("root must not have a parent".into()));
        }
        for (id, p) in parents.iter().enumerate() {
            if id != self.root && *p != 1 {
                return Err(Error::Format(format!(
                    "node {id} has {p} parents (expected 1)"
                )));
            }
        }
        // Parent counts alone admit no cycles here: every node has in-degree
        // <= 1 and the root has 0, so all n nodes hang off the root tree.
        Ok(())
    }
}
