//! CART decision tree with Gini impurity.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Gains closer than this are treated as ties.
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[column] <= threshold` go left.
    Split {
        column: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Training class counts reaching this leaf.
    Leaf { counts: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub n_classes: usize,
}

/// Number of columns examined at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(n_features))`
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let m = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            MaxFeatures::Count(c) => c,
        };
        m.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn gini(counts: &[f64], n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / n).powi(2)).sum::<f64>()
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    n_features: usize,
    params: GrowParams,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn candidate_columns(&mut self) -> Vec<usize> {
        let m = self.params.max_features.resolve(self.n_features);
        match self.rng.as_deref_mut() {
            Some(rng) if m < self.n_features => {
                let mut cols = sample(rng, self.n_features, m).into_vec();
                cols.sort_unstable();
                cols
            }
            _ => (0..self.n_features).collect(),
        }
    }

    /// Lowest weighted child impurity over midpoints of distinct sorted
    /// values. Ties keep the lowest column, then the lowest threshold.
    fn best_split(&mut self, idx: &[usize], parent_counts: &[f64]) -> Option<(usize, f64)> {
        let n = idx.len() as f64;
        let mut best: Option<(usize, f64, f64)> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        let mut left = vec![0.0; self.n_classes];
        for col in self.candidate_columns() {
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.x[i][col], self.y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0.0);
            for k in 0..pairs.len() - 1 {
                left[pairs[k].1] += 1.0;
                let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
                if lo >= hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                let right: Vec<f64> = parent_counts.iter().zip(&left).map(|(p, l)| p - l).collect();
                let impurity = (nl * gini(&left, nl) + nr * gini(&right, nr)) / n;
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                if best.is_none_or(|(_, _, b)| impurity < b - GAIN_EPS) {
                    best = Some((col, threshold, impurity));
                }
            }
        }
        best.map(|(c, t, _)| (c, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let mut counts = vec![0.0; self.n_classes];
        for &i in &idx {
            counts[self.y[i]] += 1.0;
        }
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || idx.len() < self.params.min_samples_split.max(2) {
            return self.push(Node::Leaf { counts });
        }
        let Some((column, threshold)) = self.best_split(&idx, &counts) else {
            return self.push(Node::Leaf { counts });
        };
        let (li, ri): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x[i][column] <= threshold);
        let me = self.push(Node::Leaf { counts: Vec::new() });
        let left = self.grow(li, depth + 1);
        let right = self.grow(ri, depth + 1);
        self.nodes[me] = Node::Split {
            column,
            threshold,
            left,
            right,
        };
        me
    }

    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }
}

impl DecisionTree {
    /// Grows a tree over the rows listed in `idx` (repeats allowed). `rng`
    /// drives per-split column subsampling and is only consulted when
    /// `max_features` selects fewer than all columns.
    pub(crate) fn grow(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        idx: Vec<usize>,
        params: GrowParams,
        rng: Option<&mut ChaCha8Rng>,
    ) -> DecisionTree {
        let n_features = x.first().map_or(0, Vec::len);
        let mut g = Grower {
            x,
            y,
            n_classes,
            n_features,
            params,
            rng,
            nodes: Vec::new(),
        };
        g.grow(idx, 0);
        DecisionTree {
            nodes: g.nodes,
            n_features,
            n_classes,
        }
    }

    pub fn leaf_counts(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    column,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*column] <= *threshold { *left } else { *right };
                }
                Node::Leaf { counts } => return counts,
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax_first(self.leaf_counts(row))
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    /// Structural check for decoded trees: child indices point forward, so
    /// traversal terminates, and leaves have one count per class.
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    column,
                    threshold,
                    left,
                    right,
                } => {
                    if *column >= self.n_features {
                        return Err(format!("node {i}: column {column} out of range"));
                    }
                    if threshold.is_nan() {
                        return Err(format!("node {i}: NaN threshold"));
                    }
                    for &c in [left, right] {
                        if c <= i || c >= self.nodes.len() {
                            return Err(format!("node {i}: child {c} out of range"));
                        }
                    }
                }
                Node::Leaf { counts } => {
                    if counts.len() != self.n_classes {
                        return Err(format!("node {i}: leaf has {} counts", counts.len()));
                    }
                }
            }
        }
        Ok(())
    }
}
