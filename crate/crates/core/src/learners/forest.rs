//! Random forest: bagged decision trees with per-split feature sampling.

use rand::prelude::*;

use super::tree::{TreeModel, TreeParams};

#[derive(Debug, Clone)]
pub struct ForestParams {
    pub n_trees: usize,
    pub base: TreeParams,
    /// draw a bootstrap sample per tree (disabled by the equivalence tests)
    pub bootstrap: bool,
    /// limit each split to ceil(sqrt(p)) candidate features
    pub sqrt_features: bool,
}

/// A fitted forest; majority vote over member trees.
#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
}

impl ForestModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], params: ForestParams, rng: &mut StdRng) -> Self {
        let n = rows.len();
        let n_features = rows.first().map(Vec::len).unwrap_or(0);
        let mut base = params.base.clone();
        if params.sqrt_features {
            base.max_features = Some(((n_features as f64).sqrt().ceil() as usize).max(1));
        }
        let mut trees = Vec::with_capacity(params.n_trees);
        let all: Vec<usize> = (0..n).collect();
        for _ in 0..params.n_trees {
            if params.bootstrap {
                let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                trees.push(TreeModel::fit_on(rows, labels, &sample, &base, rng));
            } else {
                trees.push(TreeModel::fit_on(rows, labels, &all, &base, rng));
            }
        }
        ForestModel { trees }
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        let votes = self.trees.iter().filter(|t| t.predict(row)).count();
        2 * votes > self.trees.len()
    }
}
