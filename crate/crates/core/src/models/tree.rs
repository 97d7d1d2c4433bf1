use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::{Column, ColumnMatrix};
use super::ModelError;

/// Splits must beat this Gini decrease to count as an improvement.
const MIN_DECREASE: f64 = 1e-12;

pub fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0]) + f64::from(counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let p0 = f64::from(counts[0]) / n;
    let p1 = f64::from(counts[1]) / n;
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Share of the tree's training draws reaching this node.
        sample_fraction: f64,
        impurity: f64,
        /// `impurity - (n_l * gini_l + n_r * gini_r) / n`.
        impurity_decrease: f64,
    },
    Leaf {
        /// Training draws per class, indexed by `UserType::index`.
        counts: [u32; 2],
        sample_fraction: f64,
        impurity: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTree")]
pub struct DecisionTree {
    n_features: usize,
    nodes: Vec<Node>,
}

#[derive(Deserialize)]
struct RawTree {
    n_features: usize,
    nodes: Vec<Node>,
}

impl TryFrom<RawTree> for DecisionTree {
    type Error = ModelError;

    fn try_from(raw: RawTree) -> Result<Self, ModelError> {
        DecisionTree::from_nodes(raw.n_features, raw.nodes)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: usize,
}

impl DecisionTree {
    /// Checks that node 0 is the root and every child index points forward
    /// to a node reached exactly once.
    pub fn from_nodes(n_features: usize, nodes: Vec<Node>) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidTree(msg));
        if nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        let mut seen = vec![false; nodes.len()];
        seen[0] = true;
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Split {
                feature,
                left,
                right,
                threshold,
                ..
            } = *node
            {
                if feature >= n_features {
                    return bad(format!(
                        "node {i} splits on feature {feature} of {n_features}"
                    ));
                }
                if !threshold.is_finite() {
                    return bad(format!("node {i} has a non-finite threshold"));
                }
                for child in [left, right] {
                    if child <= i || child >= nodes.len() || seen[child] {
                        return bad(format!("node {i} has invalid child {child}"));
                    }
                    seen[child] = true;
                }
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return bad(format!("node {orphan} is unreachable"));
        }
        Ok(Self { n_features, nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = *node {
                depth[left] = depth[i] + 1;
                depth[right] = depth[i] + 1;
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }

    pub fn leaf_for(&self, x: &[f64]) -> &Node {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[feature] < threshold { left } else { right };
                }
                ref leaf @ Node::Leaf { .. } => return leaf,
            }
        }
    }

    /// Member probability at the reached leaf.
    pub fn leaf_probability(&self, x: &[f64]) -> f64 {
        match self.leaf_for(x) {
            Node::Leaf { counts, .. } => {
                let n = f64::from(counts[0]) + f64::from(counts[1]);
                if n == 0.0 {
                    0.5
                } else {
                    f64::from(counts[1]) / n
                }
            }
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Majority class at the reached leaf; ties vote Member.
    pub fn votes_member(&self, x: &[f64]) -> bool {
        match self.leaf_for(x) {
            Node::Leaf { counts, .. } => counts[1] >= counts[0],
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Sum of `sample_fraction * impurity_decrease` per split feature.
    pub fn raw_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for node in &self.nodes {
            if let Node::Split {
                feature,
                sample_fraction,
                impurity_decrease,
                ..
            } = *node
            {
                imp[feature] += sample_fraction * impurity_decrease;
            }
        }
        imp
    }

    /// Grows a tree on `rows` (indices into `x`, repeats allowed).
    pub(crate) fn grow<R: Rng>(
        x: &ColumnMatrix,
        y: &[u8],
        mut rows: Vec<u32>,
        params: TreeParams,
        rng: &mut R,
    ) -> Self {
        let p = x.columns.len();
        let total = rows.len() as f64;
        let mut nodes = vec![placeholder()];
        // Features constant at a node stay constant below it, so each stack
        // entry carries the ones already found and skips them.
        let mut stack = vec![(0usize, 0usize, rows.len(), 0usize, Vec::<usize>::new())];
        let mut order: Vec<usize> = Vec::with_capacity(p);
        let mut known = vec![false; p];
        let mut scratch = Vec::with_capacity(rows.len());

        while let Some((id, lo, hi, depth, mut constant)) = stack.pop() {
            let slice = &rows[lo..hi];
            let counts = class_counts(y, slice);
            let impurity = gini(counts);
            let sample_fraction = slice.len() as f64 / total;
            let leaf = Node::Leaf {
                counts,
                sample_fraction,
                impurity,
            };
            let can_split = impurity > 0.0
                && params.max_depth.is_none_or(|d| depth < d)
                && slice.len() >= 2 * params.min_samples_leaf;
            let best = if can_split {
                constant.iter().for_each(|&f| known[f] = true);
                order.clear();
                order.extend((0..p).filter(|&f| !known[f]));
                constant.iter().for_each(|&f| known[f] = false);
                best_split(
                    x,
                    y,
                    slice,
                    counts,
                    impurity,
                    params,
                    &mut order,
                    &mut constant,
                    rng,
                )
            } else {
                None
            };
            let Some(split) = best else {
                nodes[id] = leaf;
                continue;
            };
            let mid = partition(
                x,
                &mut rows[lo..hi],
                split.feature,
                split.threshold,
                &mut scratch,
            );
            let left = nodes.len();
            let right = left + 1;
            nodes.push(placeholder());
            nodes.push(placeholder());
            nodes[id] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
                sample_fraction,
                impurity,
                impurity_decrease: split.decrease,
            };
            stack.push((right, lo + mid, hi, depth + 1, constant.clone()));
            stack.push((left, lo, lo + mid, depth + 1, constant));
        }
        Self {
            n_features: p,
            nodes,
        }
    }
}

fn placeholder() -> Node {
    Node::Leaf {
        counts: [0, 0],
        sample_fraction: 0.0,
        impurity: 0.0,
    }
}

fn class_counts(y: &[u8], rows: &[u32]) -> [u32; 2] {
    let member = rows.iter().filter(|&&r| y[r as usize] == 1).count() as u32;
    [rows.len() as u32 - member, member]
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

fn decrease(parent: f64, left: [u32; 2], right: [u32; 2]) -> f64 {
    let nl = f64::from(left[0] + left[1]);
    let nr = f64::from(right[0] + right[1]);
    parent - (nl * gini(left) + nr * gini(right)) / (nl + nr)
}

fn sub(a: [u32; 2], b: [u32; 2]) -> [u32; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Visits the features of `order` in random order until `max_features`
/// non-constant ones have been evaluated or all are exhausted. Features found
/// constant are appended to `constant`.
#[allow(clippy::too_many_arguments)]
fn best_split<R: Rng>(
    x: &ColumnMatrix,
    y: &[u8],
    rows: &[u32],
    counts: [u32; 2],
    impurity: f64,
    params: TreeParams,
    order: &mut [usize],
    constant: &mut Vec<usize>,
    rng: &mut R,
) -> Option<Candidate> {
    let p = order.len();
    let min_leaf = params.min_samples_leaf as u32;
    let n = rows.len() as u32;
    let mut best: Option<Candidate> = None;
    let mut evaluated = 0;
    let consider = |c: Candidate, best: &mut Option<Candidate>| {
        if c.decrease > MIN_DECREASE && best.is_none_or(|b| c.decrease > b.decrease) {
            *best = Some(c);
        }
    };
    for i in 0..p {
        if evaluated >= params.max_features {
            break;
        }
        let j = rng.random_range(i..p);
        order.swap(i, j);
        let feature = order[i];
        match &x.columns[feature] {
            Column::Binary(col) => {
                let mut left = [0u32; 2];
                for &r in rows {
                    if col[r as usize] == 0 {
                        left[usize::from(y[r as usize])] += 1;
                    }
                }
                let nl = left[0] + left[1];
                if nl == 0 || nl == n {
                    constant.push(feature);
                    continue;
                }
                evaluated += 1;
                if nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let c = Candidate {
                    feature,
                    threshold: 0.5,
                    decrease: decrease(impurity, left, sub(counts, left)),
                };
                consider(c, &mut best);
            }
            Column::Continuous(col) => {
                let mut pairs: Vec<(f64, u8)> = rows
                    .iter()
                    .map(|&r| (col[r as usize], y[r as usize]))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                if pairs[0].0 == pairs[pairs.len() - 1].0 {
                    constant.push(feature);
                    continue;
                }
                evaluated += 1;
                let mut left = [0u32; 2];
                for k in 0..pairs.len() - 1 {
                    left[usize::from(pairs[k].1)] += 1;
                    let (a, b) = (pairs[k].0, pairs[k + 1].0);
                    if a == b {
                        continue;
                    }
                    let nl = (k + 1) as u32;
                    if nl < min_leaf || n - nl < min_leaf {
                        continue;
                    }
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid <= a { b } else { mid };
                    let c = Candidate {
                        feature,
                        threshold,
                        decrease: decrease(impurity, left, sub(counts, left)),
                    };
                    consider(c, &mut best);
                }
            }
        }
    }
    best
}

/// Stable in-place partition; returns the size of the left block.
fn partition(
    x: &ColumnMatrix,
    rows: &mut [u32],
    feature: usize,
    threshold: f64,
    scratch: &mut Vec<u32>,
) -> usize {
    let goes_left = |r: u32| match &x.columns[feature] {
        Column::Binary(col) => f64::from(col[r as usize]) < threshold,
        Column::Continuous(col) => col[r as usize] < threshold,
    };
    scratch.clear();
    let mut n_left = 0;
    for k in 0..rows.len() {
        let r = rows[k];
        if goes_left(r) {
            rows[n_left] = r;
            n_left += 1;
        } else {
            scratch.push(r);
        }
    }
    rows[n_left..].copy_from_slice(scratch);
    n_left
}
