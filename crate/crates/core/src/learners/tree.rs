//! CART-style decision tree used directly and as the forest member.

use rand::prelude::*;

/// Node impurity measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    fn impurity(self, pos: usize, total: usize) -> f64 {
        if total == 0 {
            return 0.0;
        }
        let p = pos as f64 / total as f64;
        let q = 1.0 - p;
        match self {
            Criterion::Gini => 1.0 - p * p - q * q,
            Criterion::Entropy => {
                let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
                term(p) + term(q)
            }
        }
    }
}

/// How candidate thresholds are chosen at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitter {
    /// scan every boundary between adjacent sorted values
    Best,
    /// draw one random threshold per feature, keep the best feature
    Random,
}

#[derive(Debug, Clone)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub splitter: Splitter,
    /// nodes with fewer rows become leaves
    pub min_split_rows: usize,
    /// candidate features per split; `None` = all features
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(bool),
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

/// A fitted decision tree.
#[derive(Debug, Clone)]
pub struct TreeModel {
    root: Node,
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [bool],
    params: &'a TreeParams,
    n_features: usize,
}

impl<'a> Builder<'a> {
    fn majority(&self, idx: &[usize]) -> bool {
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        // exact ties resolve to the negative class
        2 * pos > idx.len()
    }

    fn candidate_features(&self, rng: &mut StdRng) -> Vec<usize> {
        match self.params.max_features {
            Some(m) if m < self.n_features => {
                rand::seq::index::sample(rng, self.n_features, m).into_vec()
            }
            _ => (0..self.n_features).collect(),
        }
    }

    /// Best (feature, threshold, weighted child impurity) for this node, or
    /// None when no feature separates the rows.
    fn find_split(&self, idx: &[usize], rng: &mut StdRng) -> Option<(usize, f64)> {
        let total = idx.len();
        let pos_total = idx.iter().filter(|&&i| self.labels[i]).count();
        let parent = self.params.criterion.impurity(pos_total, total);
        let mut best: Option<(usize, f64, f64)> = None;

        for feature in self.candidate_features(rng) {
            match self.params.splitter {
                Splitter::Best => {
                    let mut pairs: Vec<(f64, bool)> =
                        idx.iter().map(|&i| (self.rows[i][feature], self.labels[i])).collect();
                    pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                    let mut left_n = 0usize;
                    let mut left_pos = 0usize;
                    for k in 0..total - 1 {
                        left_n += 1;
                        if pairs[k].1 {
                            left_pos += 1;
                        }
                        let v = pairs[k].0;
                        let next = pairs[k + 1].0;
                        if v == next {
                            continue;
                        }
                        let threshold = v + (next - v) / 2.0;
                        let right_n = total - left_n;
                        let right_pos = pos_total - left_pos;
                        let score = (left_n as f64
                            * self.params.criterion.impurity(left_pos, left_n)
                            + right_n as f64 * self.params.criterion.impurity(right_pos, right_n))
                            / total as f64;
                        if best.map(|(_, _, s)| score < s).unwrap_or(true) {
                            best = Some((feature, threshold, score));
                        }
                    }
                }
                Splitter::Random => {
                    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                    for &i in idx {
                        lo = lo.min(self.rows[i][feature]);
                        hi = hi.max(self.rows[i][feature]);
                    }
                    if lo >= hi {
                        continue;
                    }
                    let threshold = rng.gen_range(lo..hi);
                    let mut left_n = 0;
                    let mut left_pos = 0;
                    for &i in idx {
                        if self.rows[i][feature] <= threshold {
                            left_n += 1;
                            if self.labels[i] {
                                left_pos += 1;
                            }
                        }
                    }
                    let right_n = total - left_n;
                    if left_n == 0 || right_n == 0 {
                        continue;
                    }
                    let right_pos = pos_total - left_pos;
                    let score = (left_n as f64 * self.params.criterion.impurity(left_pos, left_n)
                        + right_n as f64 * self.params.criterion.impurity(right_pos, right_n))
                        / total as f64;
                    if best.map(|(_, _, s)| score < s).unwrap_or(true) {
                        best = Some((feature, threshold, score));
                    }
                }
            }
        }
        // keep splitting only while impurity actually drops
        best.filter(|&(_, _, score)| score < parent - 1e-12).map(|(f, t, _)| (f, t))
    }

    fn build(&self, idx: Vec<usize>, rng: &mut StdRng) -> Node {
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        if pos == 0 || pos == idx.len() || idx.len() < self.params.min_split_rows {
            return Node::Leaf(self.majority(&idx));
        }
        let Some((feature, threshold)) = self.find_split(&idx, rng) else {
            return Node::Leaf(self.majority(&idx));
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.rows[i][feature] <= threshold);
        if left.is_empty() || right.is_empty() {
            let all: Vec<usize> = left.into_iter().chain(right).collect();
            return Node::Leaf(self.majority(&all));
        }
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.build(left, rng)),
            right: Box::new(self.build(right, rng)),
        }
    }
}

impl TreeModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], params: TreeParams, rng: &mut StdRng) -> Self {
        Self::fit_on(rows, labels, &(0..rows.len()).collect::<Vec<_>>(), &params, rng)
    }

    /// Fit on a subset of row indices (bootstrap samples reuse this).
    pub fn fit_on(
        rows: &[Vec<f64>],
        labels: &[bool],
        idx: &[usize],
        params: &TreeParams,
        rng: &mut StdRng,
    ) -> Self {
        let builder =
            Builder { rows, labels, params, n_features: rows.first().map(Vec::len).unwrap_or(0) };
        TreeModel { root: builder.build(idx.to_vec(), rng) }
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(label) => return *label,
                Node::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}
