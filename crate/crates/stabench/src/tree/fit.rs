//! Greedy CART growth with best-split and random-split strategies.
//!
//! Nodes are processed from an explicit work stack (depth first, left child
//! first) and children are appended to the arena as their parent is split, so
//! node numbering is a pure function of data, hyperparameters, and seed. The
//! RNG is consumed only by nodes that pass every stop check, which keeps the
//! consumption order — and therefore the whole tree — deterministic.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::tree::impurity::{impurity, Criterion};
use crate::tree::model::{
    RegressionTree, Split, Splitter, TreeHyperParams, TreeNode, TREE_FORMAT_VERSION,
};

/// Fits a regression tree on `features`/`targets`.
///
/// Candidate thresholds of the best splitter are midpoints between
/// consecutive distinct sorted feature values; the random splitter draws one
/// uniform threshold per candidate feature. A split is adopted only when it
/// strictly improves the criterion, with ties resolved toward the lowest
/// feature index and then the lowest threshold.
pub fn fit_tree(
    features: &FeatureMatrix,
    targets: &[f64],
    params: &TreeHyperParams,
    seed: u64,
) -> Result<RegressionTree> {
    params.validate()?;
    let n = features.n_rows();
    let d = features.n_cols();
    if targets.len() != n {
        return Err(Error::Domain(format!(
            "feature matrix has {n} rows but {} targets were given",
            targets.len()
        )));
    }
    if n == 0 {
        return Err(Error::Domain(
            "cannot fit a tree on an empty dataset".into(),
        ));
    }
    if features.rows().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("features must be finite".into()));
    }
    if targets.iter().any(|y| !y.is_finite()) {
        return Err(Error::Domain("targets must be finite".into()));
    }
    if params.criterion == Criterion::Poisson && targets.iter().any(|y| *y < 0.0) {
        return Err(Error::Domain(
            "poisson criterion requires non-negative targets".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = Builder {
        features,
        targets,
        params,
        rng: &mut rng,
        nodes: Vec::new(),
    };

    let all: Vec<usize> = (0..n).collect();
    let root = builder.alloc_node(&all)?;
    let mut stack = vec![WorkItem {
        node: root,
        indices: all,
        depth: 0,
    }];
    while let Some(item) = stack.pop() {
        if let Some((left, right)) = builder.try_split(&item)? {
            // Right is pushed first so the left child is expanded next.
            stack.push(right);
            stack.push(left);
        }
    }

    let tree = RegressionTree {
        format_version: TREE_FORMAT_VERSION,
        n_features: d,
        root: 0,
        seed,
        params: *params,
        nodes: builder.nodes,
    };
    tree.validate()?;
    Ok(tree)
}

struct WorkItem {
    node: usize,
    indices: Vec<usize>,
    depth: usize,
}

struct Builder<'a> {
    features: &'a FeatureMatrix,
    targets: &'a [f64],
    params: &'a TreeHyperParams,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<TreeNode>,
}

/// A candidate split with its improvement score (criterion decrease, or the
/// Friedman score when that criterion is active).
#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn alloc_node(&mut self, indices: &[usize]) -> Result<usize> {
        let ys: Vec<f64> = indices.iter().map(|&i| self.targets[i]).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        self.nodes.push(TreeNode {
            impurity: impurity(&ys, self.params.criterion)?,
            n_samples: indices.len(),
            value: mean,
            split: None,
        });
        Ok(self.nodes.len() - 1)
    }

    /// Splits the node if allowed and profitable; returns the child work items.
    fn try_split(&mut self, item: &WorkItem) -> Result<Option<(WorkItem, WorkItem)>> {
        let node_impurity = self.nodes[item.node].impurity;
        let n = item.indices.len();
        if let Some(max_depth) = self.params.max_depth {
            if item.depth >= max_depth {
                return Ok(None);
            }
        }
        if n < self.params.min_samples_split || n < 2 || node_impurity <= 0.0 {
            return Ok(None);
        }

        // The RNG is touched only after all stop checks have passed.
        let candidates = self.draw_candidates(&item.indices);
        if candidates.is_empty() {
            return Ok(None);
        }

        let best = match self.params.splitter {
            Splitter::Best => self.best_split(&item.indices, &candidates),
            Splitter::Random => self.random_split(&item.indices, &candidates)?,
        };
        let Some(cand) = best else { return Ok(None) };

        let mut left_idx = Vec::with_capacity(n);
        let mut right_idx = Vec::with_capacity(n);
        for &i in &item.indices {
            if self.features.row(i)[cand.feature] <= cand.threshold {
                left_idx.push(i);
            } else {
                right_idx.push(i);
            }
        }
        debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());

        let left = self.alloc_node(&left_idx)?;
        let right = self.alloc_node(&right_idx)?;
        self.nodes[item.node].split = Some(Split {
            feature: cand.feature,
            threshold: cand.threshold,
            left,
            right,
        });
        Ok(Some((
            WorkItem {
                node: left,
                indices: left_idx,
                depth: item.depth + 1,
            },
            WorkItem {
                node: right,
                indices: right_idx,
                depth: item.depth + 1,
            },
        )))
    }

    /// Candidate features for one node, sorted by index. Features that are
    /// constant within the node cannot split it and do not count against the
    /// subsampling budget; they are skipped and replaced by further draws
    /// until the budget is met or the pool runs out. Without the replacement
    /// draws, deep nodes — where most features are locally constant — would
    /// routinely exhaust their whole budget on unsplittable features.
    fn draw_candidates(&mut self, indices: &[usize]) -> Vec<usize> {
        let d = self.features.n_cols();
        let k = self.params.max_features.count(d);
        if k >= d {
            return (0..d)
                .filter(|&f| !self.is_node_constant(indices, f))
                .collect();
        }
        let mut pool: Vec<usize> = (0..d).collect();
        let mut remaining = d;
        let mut candidates = Vec::with_capacity(k);
        while candidates.len() < k && remaining > 0 {
            let j = self.rng.random_range(0..remaining);
            let f = pool[j];
            pool.swap(j, remaining - 1);
            remaining -= 1;
            if !self.is_node_constant(indices, f) {
                candidates.push(f);
            }
        }
        candidates.sort_unstable();
        candidates
    }

    /// Whether a feature takes a single value across the node's samples.
    fn is_node_constant(&self, indices: &[usize], feature: usize) -> bool {
        let first = self.features.row(indices[0])[feature];
        indices[1..]
            .iter()
            .all(|&i| self.features.row(i)[feature] == first)
    }

    /// Exhaustive scan over midpoints of consecutive distinct values of each
    /// candidate feature.
    fn best_split(&self, indices: &[usize], candidates: &[usize]) -> Option<Candidate> {
        let state = ScanState::new(indices, self.targets, self.params.criterion);
        let n = indices.len();
        let mut best: Option<Candidate> = None;
        let mut order = vec![0usize; n];
        for &f in candidates {
            order.copy_from_slice(indices);
            order.sort_unstable_by(|&a, &b| {
                self.features.row(a)[f].total_cmp(&self.features.row(b)[f])
            });
            let mut sweep = SweepAccumulator::new(&state);
            for pos in 1..n {
                sweep.push(&state, self.targets[order[pos - 1]]);
                let a = self.features.row(order[pos - 1])[f];
                let b = self.features.row(order[pos])[f];
                if a < b {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a; // midpoint rounded up between adjacent floats
                    }
                    let score = sweep.score(&state, pos);
                    if score > best.map_or(0.0, |c| c.score) {
                        best = Some(Candidate {
                            feature: f,
                            threshold,
                            score,
                        });
                    }
                }
            }
        }
        best
    }

    /// One uniform threshold per candidate feature, scored by the same
    /// criterion as the best splitter. Constant features are skipped without
    /// consuming randomness.
    fn random_split(
        &mut self,
        indices: &[usize],
        candidates: &[usize],
    ) -> Result<Option<Candidate>> {
        let n = indices.len() as f64;
        let parent = impurity(
            &indices.iter().map(|&i| self.targets[i]).collect::<Vec<_>>(),
            self.params.criterion,
        )?;
        let mut best: Option<Candidate> = None;
        for &f in candidates {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &i in indices {
                let v = self.features.row(i)[f];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if lo >= hi {
                continue;
            }
            let threshold = self.rng.random_range(lo..hi);
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &i in indices {
                if self.features.row(i)[f] <= threshold {
                    left.push(self.targets[i]);
                } else {
                    right.push(self.targets[i]);
                }
            }
            debug_assert!(!left.is_empty() && !right.is_empty());
            let score = match self.params.criterion {
                Criterion::FriedmanMse => {
                    let ml = left.iter().sum::<f64>() / left.len() as f64;
                    let mr = right.iter().sum::<f64>() / right.len() as f64;
                    (left.len() as f64) * (right.len() as f64) / n * (ml - mr) * (ml - mr)
                }
                c => {
                    let il = impurity(&left, c)?;
                    let ir = impurity(&right, c)?;
                    parent - (left.len() as f64 * il + right.len() as f64 * ir) / n
                }
            };
            if score > best.map_or(0.0, |c| c.score) {
                best = Some(Candidate {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
        Ok(best)
    }
}

/// Per-node state shared by every feature sweep of the best splitter: node
/// totals for the incremental criterion updates and, for absolute error, the
/// coordinate-compressed target multiset with total prefix tables.
struct ScanState {
    criterion: Criterion,
    parent_impurity: f64,
    n: usize,
    total_sum: f64,
    total_sum_sq: f64,
    /// Sum of y*ln(y) over all positive targets of the node (Poisson).
    total_ylny: f64,
    /// Sorted distinct target values (absolute error only; empty otherwise).
    distinct: Vec<f64>,
    /// Prefix tables over `distinct`: entry r covers ranks 0..r.
    total_cnt: Vec<usize>,
    total_rank_sum: Vec<f64>,
}

impl ScanState {
    fn new(indices: &[usize], targets: &[f64], criterion: Criterion) -> Self {
        let ys: Vec<f64> = indices.iter().map(|&i| targets[i]).collect();
        let parent_impurity = impurity(&ys, criterion).expect("targets validated before fitting");
        let n = ys.len();
        let total_sum = ys.iter().sum();
        let total_sum_sq = ys.iter().map(|y| y * y).sum();
        let total_ylny = ys.iter().filter(|y| **y > 0.0).map(|y| y * y.ln()).sum();

        let (mut distinct, mut total_cnt, mut total_rank_sum) =
            (Vec::new(), Vec::new(), Vec::new());
        if criterion == Criterion::AbsoluteError {
            let mut sorted = ys;
            sorted.sort_unstable_by(f64::total_cmp);
            distinct = sorted.clone();
            distinct.dedup();
            total_cnt = vec![0usize; distinct.len() + 1];
            total_rank_sum = vec![0.0; distinct.len() + 1];
            for (r, v) in distinct.iter().enumerate() {
                let cnt = sorted[total_cnt[r]..]
                    .iter()
                    .take_while(|y| **y == *v)
                    .count();
                total_cnt[r + 1] = total_cnt[r] + cnt;
                total_rank_sum[r + 1] = total_rank_sum[r] + v * cnt as f64;
            }
        }
        Self {
            criterion,
            parent_impurity,
            n,
            total_sum,
            total_sum_sq,
            total_ylny,
            distinct,
            total_cnt,
            total_rank_sum,
        }
    }

    fn rank_of(&self, y: f64) -> usize {
        self.distinct.partition_point(|v| *v < y)
    }

    /// Number of ranks whose value is <= `m`.
    fn ranks_le(&self, m: f64) -> usize {
        self.distinct.partition_point(|v| *v <= m)
    }
}

/// Running left-side statistics of one feature sweep.
struct SweepAccumulator {
    count: usize,
    sum: f64,
    sum_sq: f64,
    sum_ylny: f64,
    cnt_bit: Fenwick,
    sum_bit: FenwickF,
}

impl SweepAccumulator {
    fn new(state: &ScanState) -> Self {
        Self {
            count: 0,
            sum: 0.0,
            sum_sq: 0.0,
            sum_ylny: 0.0,
            cnt_bit: Fenwick::new(state.distinct.len()),
            sum_bit: FenwickF::new(state.distinct.len()),
        }
    }

    fn push(&mut self, state: &ScanState, y: f64) {
        self.count += 1;
        self.sum += y;
        self.sum_sq += y * y;
        if y > 0.0 {
            self.sum_ylny += y * y.ln();
        }
        if state.criterion == Criterion::AbsoluteError {
            let r = state.rank_of(y);
            self.cnt_bit.add(r, 1);
            self.sum_bit.add(r, y);
        }
    }

    /// Improvement score once `n_left` samples sit left of the boundary:
    /// impurity decrease, or the Friedman score for that criterion.
    fn score(&self, state: &ScanState, n_left: usize) -> f64 {
        debug_assert_eq!(n_left, self.count);
        let n = state.n as f64;
        let nl = n_left as f64;
        let nr = n - nl;
        match state.criterion {
            Criterion::SquaredError => {
                let sse_l = (self.sum_sq - self.sum * self.sum / nl).max(0.0);
                let rs = state.total_sum - self.sum;
                let sse_r = ((state.total_sum_sq - self.sum_sq) - rs * rs / nr).max(0.0);
                state.parent_impurity - (sse_l + sse_r) / n
            }
            Criterion::FriedmanMse => {
                let ml = self.sum / nl;
                let mr = (state.total_sum - self.sum) / nr;
                nl * nr / n * (ml - mr) * (ml - mr)
            }
            Criterion::Poisson => {
                let dev = |s: f64, ylny: f64, k: f64| -> f64 {
                    if s <= 0.0 {
                        0.0
                    } else {
                        (ylny - s * (s / k).ln()).max(0.0)
                    }
                };
                let dev_l = dev(self.sum, self.sum_ylny, nl);
                let dev_r = dev(
                    state.total_sum - self.sum,
                    state.total_ylny - self.sum_ylny,
                    nr,
                );
                state.parent_impurity - (dev_l + dev_r) / n
            }
            Criterion::AbsoluteError => {
                let sad_l = self.left_abs_deviation(state, n_left);
                let sad_r = self.right_abs_deviation(state, state.n - n_left);
                state.parent_impurity - (sad_l + sad_r) / n
            }
        }
    }

    /// Sum of |y - median| over the left side (k samples).
    fn left_abs_deviation(&self, state: &ScanState, k: usize) -> f64 {
        let a = state.distinct[self.cnt_bit.select((k - 1) / 2)];
        let b = state.distinct[self.cnt_bit.select(k / 2)];
        let m = a + (b - a) / 2.0;
        let r = state.ranks_le(m);
        let cnt_le = self.cnt_bit.prefix(r) as f64;
        let sum_le = self.sum_bit.prefix(r);
        m * cnt_le - sum_le + (self.sum - sum_le) - m * (k as f64 - cnt_le)
    }

    /// Sum of |y - median| over the right side (k samples), derived from the
    /// node totals minus the left-side trees.
    fn right_abs_deviation(&self, state: &ScanState, k: usize) -> f64 {
        let right_cnt = |r: usize| state.total_cnt[r] - self.cnt_bit.prefix(r);
        // Smallest rank index whose right-side cumulative count reaches j+1.
        let select_right = |j: usize| -> usize {
            let (mut lo, mut hi) = (1usize, state.distinct.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                if right_cnt(mid) > j {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo - 1
        };
        let a = state.distinct[select_right((k - 1) / 2)];
        let b = state.distinct[select_right(k / 2)];
        let m = a + (b - a) / 2.0;
        let r = state.ranks_le(m);
        let cnt_le = right_cnt(r) as f64;
        let sum_le = state.total_rank_sum[r] - self.sum_bit.prefix(r);
        let total = state.total_sum - self.sum;
        m * cnt_le - sum_le + (total - sum_le) - m * (k as f64 - cnt_le)
    }
}

/// Fenwick tree over counts, with prefix-descent order statistics.
struct Fenwick {
    len: usize,
    tree: Vec<usize>,
}

impl Fenwick {
    fn new(len: usize) -> Self {
        Self {
            len,
            tree: vec![0; len + 1],
        }
    }

    fn add(&mut self, mut i: usize, v: usize) {
        i += 1;
        while i <= self.len {
            self.tree[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Count over ranks 0..r.
    fn prefix(&self, mut r: usize) -> usize {
        let mut s = 0;
        while r > 0 {
            s += self.tree[r];
            r -= r & r.wrapping_neg();
        }
        s
    }

    /// 0-based rank holding the (j+1)-th smallest stored element.
    fn select(&self, j: usize) -> usize {
        let mut pos = 0usize;
        let mut rem = j + 1;
        let mut step = self.len.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.len && self.tree[next] < rem {
                pos = next;
                rem -= self.tree[next];
            }
            step >>= 1;
        }
        pos // first index with prefix(pos + 1) >= j + 1
    }
}

/// Fenwick tree over f64 sums.
struct FenwickF {
    len: usize,
    tree: Vec<f64>,
}

impl FenwickF {
    fn new(len: usize) -> Self {
        Self {
            len,
            tree: vec![0.0; len + 1],
        }
    }

    fn add(&mut self, mut i: usize, v: f64) {
        i += 1;
        while i <= self.len {
            self.tree[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut r: usize) -> f64 {
        let mut s = 0.0;
        while r > 0 {
            s += self.tree[r];
            r -= r & r.wrapping_neg();
        }
        s
    }
}
