//! Least-squares regression trees with exhaustive midpoint splits.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node<T> {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf { value: T },
}

/// Binary tree stored as a node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T: Scalar> RegressionTree<T> {
    pub fn leaf(value: T) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    #[inline]
    pub fn evaluate(&self, x: &[T]) -> T {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { value } => return *value,
            }
        }
    }

    pub fn is_single_leaf(&self) -> bool {
        matches!(self.nodes.as_slice(), [Node::Leaf { .. }])
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go<T>(nodes: &[Node<T>], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    /// Feature indices below `n_features`, child links in range.
    pub fn is_well_formed(&self, n_features: usize) -> bool {
        self.nodes.iter().all(|n| match n {
            Node::Split {
                feature,
                left,
                right,
                ..
            } => *feature < n_features && *left < self.nodes.len() && *right < self.nodes.len(),
            Node::Leaf { .. } => true,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

/// Column-major copy of the features plus, per feature, the row indices
/// in ascending value order (ties by row index).
pub(crate) struct Presorted<T> {
    columns: Vec<Vec<T>>,
    order: Vec<Vec<usize>>,
}

impl<T: Scalar> Presorted<T> {
    pub fn new(rows: &[Vec<T>], n_features: usize) -> Self {
        let columns: Vec<Vec<T>> = (0..n_features)
            .map(|f| rows.iter().map(|r| r[f]).collect())
            .collect();
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<usize> = (0..col.len()).collect();
                idx.sort_by(|&a, &b| {
                    col[a]
                        .partial_cmp(&col[b])
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Presorted { columns, order }
    }
}

struct SplitChoice<T> {
    feature: usize,
    threshold: T,
}

/// Fits one tree to `targets` by greedy best-first squared-error splits.
pub(crate) fn fit_tree<T: Scalar>(
    data: &Presorted<T>,
    targets: &[T],
    params: TreeParams,
) -> RegressionTree<T> {
    let n = targets.len();
    let mut nodes = Vec::new();
    let mut in_node = vec![true; n];
    let rows: Vec<usize> = (0..n).collect();
    grow(data, targets, params, &rows, 0, &mut in_node, &mut nodes);
    RegressionTree { nodes }
}

fn mean<T: Scalar>(targets: &[T], rows: &[usize]) -> T {
    rows.iter().fold(T::zero(), |a, &r| a + targets[r]) / T::count(rows.len())
}

fn grow<T: Scalar>(
    data: &Presorted<T>,
    targets: &[T],
    params: TreeParams,
    rows: &[usize],
    depth: usize,
    in_node: &mut [bool],
    nodes: &mut Vec<Node<T>>,
) -> usize {
    let id = nodes.len();
    nodes.push(Node::Leaf {
        value: mean(targets, rows),
    });
    if depth >= params.max_depth {
        return id;
    }
    for &r in rows {
        in_node[r] = true;
    }
    let choice = best_split(data, targets, params, rows, in_node);
    for &r in rows {
        in_node[r] = false;
    }
    let Some(choice) = choice else {
        return id;
    };

    let column = &data.columns[choice.feature];
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| column[r] <= choice.threshold);
    let left = grow(data, targets, params, &left_rows, depth + 1, in_node, nodes);
    let right = grow(data, targets, params, &right_rows, depth + 1, in_node, nodes);
    nodes[id] = Node::Split {
        feature: choice.feature,
        threshold: choice.threshold,
        left,
        right,
    };
    id
}

fn best_split<T: Scalar>(
    data: &Presorted<T>,
    targets: &[T],
    params: TreeParams,
    rows: &[usize],
    in_node: &[bool],
) -> Option<SplitChoice<T>> {
    let n = rows.len();
    let min_leaf = params.min_leaf.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let total = rows.iter().fold(T::zero(), |a, &r| a + targets[r]);
    let n_t = T::count(n);
    let parent = total * total / n_t;

    let mut best: Option<(T, SplitChoice<T>)> = None;
    let mut sorted = Vec::with_capacity(n);
    for (f, order) in data.order.iter().enumerate() {
        let column = &data.columns[f];
        sorted.clear();
        sorted.extend(order.iter().copied().filter(|&r| in_node[r]));
        let mut left_sum = T::zero();
        for i in 0..n - 1 {
            left_sum = left_sum + targets[sorted[i]];
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < min_leaf {
                continue;
            }
            if n_right < min_leaf {
                break;
            }
            let lo = column[sorted[i]];
            let hi = column[sorted[i + 1]];
            if !(lo < hi) {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / T::count(n_left)
                + right_sum * right_sum / T::count(n_right)
                - parent;
            if gain > T::zero() && best.as_ref().is_none_or(|(g, _)| gain > *g) {
                let mut threshold = lo + (hi - lo) / T::lit(2.0);
                if !(threshold < hi) {
                    threshold = lo;
                }
                best = Some((
                    gain,
                    SplitChoice {
                        feature: f,
                        threshold,
                    },
                ));
            }
        }
    }
    best.map(|(_, c)| c)
}
