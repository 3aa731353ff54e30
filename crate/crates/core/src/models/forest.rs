//! Random forest of Gini trees with bootstrap rows, per-split feature
//! subsampling and hard-vote probabilities.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::par::map_range;
use crate::rng::rng_for;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 50, max_depth: 8, min_leaf: 2, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf(usize),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(c) => return c,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &k) in counts.iter().enumerate() {
        if k > counts[best] {
            best = c;
        }
    }
    best
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    k: usize,
    params: &'a ForestParams,
    n_sub: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &r in rows {
            c[self.y[r]] += 1;
        }
        c
    }

    /// Lowest weighted child impurity over thresholds of one feature.
    fn best_on_feature(&self, rows: &[usize], f: usize) -> Option<BestSplit> {
        let mut order: Vec<(f64, usize)> = rows.iter().map(|&r| (self.x[[r, f]], self.y[r])).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = order.len();
        let min_leaf = self.params.min_leaf.max(1);
        let mut left = vec![0usize; self.k];
        let mut right = vec![0usize; self.k];
        for &(_, c) in &order {
            right[c] += 1;
        }
        let mut best: Option<BestSplit> = None;
        for i in 0..n - 1 {
            let c = order[i].1;
            left[c] += 1;
            right[c] -= 1;
            let nl = i + 1;
            if order[i].0 == order[i + 1].0 || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let score = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
            if best.as_ref().is_none_or(|b| score < b.score) {
                let threshold = order[i].0 + (order[i + 1].0 - order[i].0) / 2.0;
                best = Some(BestSplit { score, feature: f, threshold });
            }
        }
        best
    }

    fn build(&mut self, rows: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.counts(rows);
        let n = rows.len();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(majority(&counts)));
        let impurity = gini(&counts, n);
        if depth >= self.params.max_depth || impurity == 0.0 || n < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let d = self.x.ncols();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        // Sampled features first; fall through to the rest only if none of
        // them admits a split at all.
        for (i, &f) in features.iter().enumerate() {
            if i >= self.n_sub && best.is_some() {
                break;
            }
            if let Some(s) = self.best_on_feature(rows, f) {
                if best.as_ref().is_none_or(|b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { return id };
        let mut l: Vec<usize> = Vec::new();
        let mut r: Vec<usize> = Vec::new();
        for &row in rows.iter() {
            if self.x[[row, split.feature]] <= split.threshold {
                l.push(row);
            } else {
                r.push(row);
            }
        }
        let left = self.build(&mut l, depth + 1, rng);
        let right = self.build(&mut r, depth + 1, rng);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

pub fn fit(params: &ForestParams, x: ArrayView2<f64>, y: &[usize], n_classes: usize) -> ForestModel {
    let n = x.nrows();
    let d = x.ncols();
    let n_sub = ((d as f64).sqrt().floor() as usize).max(1);
    let trees = map_range(params.n_trees, |t| {
        let mut rng = rng_for(params.seed, t as u64);
        let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut b = Builder { x, y, k: n_classes, params, n_sub, nodes: Vec::new() };
        if d == 0 {
            let counts = b.counts(&rows);
            return Tree { nodes: vec![Node::Leaf(majority(&counts))] };
        }
        b.build(&mut rows, 0, &mut rng);
        Tree { nodes: b.nodes }
    });
    ForestModel { trees, n_classes }
}

impl ForestModel {
    /// Fraction of trees voting for each class.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut p = Array2::zeros((x.nrows(), self.n_classes));
        let w = 1.0 / self.trees.len() as f64;
        for (i, row) in x.rows().into_iter().enumerate() {
            let row = row.to_vec();
            for t in &self.trees {
                p[[i, t.predict(&row)]] += w;
            }
        }
        p
    }
}
