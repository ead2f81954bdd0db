//! The tuning option space encoded as a weighted tree.
//!
//! The tree has a preprocessor root and a learner root. Choice nodes pick
//! exactly one child (which preprocessor, which categorical value); a
//! selected preprocessor or learner node then samples every one of its
//! parameter children. Numeric leaves carry a live `(lo, hi)` range that
//! narrowing can shrink; every node carries an endorse/deprecate weight.
//!
//! A tree is owned by exactly one optimization run; sampling is read-only
//! but reweighting and narrowing mutate it.

use std::collections::BTreeMap;

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, ParamValue};
use crate::error::{Error, Result};
use crate::learners::{LearnerKind, LearnerSpec};
use crate::preprocess::{PreprocKind, PreprocSpec};

/// Which experiment family a tree serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    Defect,
    Text,
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaskKind::Defect => "defect",
            TaskKind::Text => "text",
        })
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "defect" => Ok(TaskKind::Defect),
            "text" => Ok(TaskKind::Text),
            other => Err(Error::InvalidParam(format!("unknown task '{other}'"))),
        }
    }
}

/// A numeric range leaf with its original bounds, current narrowed bounds
/// and the best/worst `(value, score)` pair seen so far.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericLeaf {
    pub original_lo: f64,
    pub original_hi: f64,
    pub lo: f64,
    pub hi: f64,
    pub integer: bool,
    /// sampled value and score of the best-scoring evaluation using this leaf
    pub best: Option<(f64, f64)>,
    pub worst: Option<(f64, f64)>,
}

impl NumericLeaf {
    fn new(lo: f64, hi: f64, integer: bool) -> Self {
        NumericLeaf { original_lo: lo, original_hi: hi, lo, hi, integer, best: None, worst: None }
    }

    fn sample(&self, rng: &mut StdRng) -> f64 {
        let raw = if self.lo >= self.hi { self.lo } else { rng.gen_range(self.lo..self.hi) };
        if self.integer {
            raw.round()
        } else {
            raw
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum NodePayload {
    /// pick exactly one child
    Choice(Vec<OptionNode>),
    /// visit every child (a preprocessor/learner's parameter set)
    Params(Vec<OptionNode>),
    /// a categorical value
    Value(ParamValue),
    Numeric(NumericLeaf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptionNode {
    pub label: String,
    pub weight: i64,
    pub payload: NodePayload,
}

impl OptionNode {
    fn new(label: impl Into<String>, payload: NodePayload) -> Self {
        OptionNode { label: label.into(), weight: 0, payload }
    }

    fn children(&self) -> Option<&[OptionNode]> {
        match &self.payload {
            NodePayload::Choice(c) | NodePayload::Params(c) => Some(c),
            _ => None,
        }
    }

    fn children_mut(&mut self) -> Option<&mut Vec<OptionNode>> {
        match &mut self.payload {
            NodePayload::Choice(c) | NodePayload::Params(c) => Some(c),
            _ => None,
        }
    }

    fn find_mut(&mut self, address: &[&str]) -> Option<&mut OptionNode> {
        if address.is_empty() {
            return Some(self);
        }
        self.children_mut()?
            .iter_mut()
            .find(|c| c.label == address[0])
            .and_then(|c| c.find_mut(&address[1..]))
    }

    fn find(&self, address: &[&str]) -> Option<&OptionNode> {
        if address.is_empty() {
            return Some(self);
        }
        self.children()?
            .iter()
            .find(|c| c.label == address[0])
            .and_then(|c| c.find(&address[1..]))
    }
}

/// One sampled configuration plus the tree addresses it touched.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningChoice {
    pub preproc: PreprocSpec,
    pub learner: LearnerSpec,
    /// slash-joined node addresses from both roots, in traversal order
    pub path: Vec<String>,
    /// numeric leaf addresses and the values drawn from them
    pub numeric_samples: Vec<(String, f64)>,
}

/// How branch-level and categorical selections are made.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SelectMode {
    Uniform,
    /// maximal weight, ties broken uniformly at random
    Weighted,
}

/// The full option space for one task.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptionTree {
    pub task: TaskKind,
    pub preproc_root: OptionNode,
    pub learner_root: OptionNode,
}

fn param_node(name: &str, domain: &Domain) -> OptionNode {
    match domain {
        Domain::Real { lo, hi } => {
            OptionNode::new(name, NodePayload::Numeric(NumericLeaf::new(*lo, *hi, false)))
        }
        Domain::Int { lo, hi } => OptionNode::new(
            name,
            NodePayload::Numeric(NumericLeaf::new(*lo as f64, *hi as f64, true)),
        ),
        Domain::IntChoice(choices) => {
            let children = choices
                .iter()
                .map(|&v| OptionNode::new(v.to_string(), NodePayload::Value(ParamValue::Int(v))))
                .collect();
            OptionNode::new(name, NodePayload::Choice(children))
        }
        Domain::Cat(choices) => {
            let children = choices
                .iter()
                .map(|v| OptionNode::new(v.clone(), NodePayload::Value(ParamValue::Cat(v.clone()))))
                .collect();
            OptionNode::new(name, NodePayload::Choice(children))
        }
    }
}

/// Build the task's option tree with every weight at zero and every
/// numeric range at its full width.
pub fn build_table1_tree(task: TaskKind) -> OptionTree {
    let preproc_kinds: Vec<PreprocKind> = match task {
        TaskKind::Defect => PreprocKind::defect_kinds().to_vec(),
        TaskKind::Text => PreprocKind::text_kinds().to_vec(),
    };
    let preproc_children: Vec<OptionNode> = preproc_kinds
        .into_iter()
        .map(|kind| {
            let params: Vec<OptionNode> = kind
                .param_domains()
                .iter()
                // the inference switch is a mode toggle, not a tuned option
                .filter(|pd| !(kind == PreprocKind::Lda && pd.name == "inference"))
                .map(|pd| param_node(&pd.name, &pd.domain))
                .collect();
            OptionNode::new(kind.name(), NodePayload::Params(params))
        })
        .collect();

    let learner_children: Vec<OptionNode> = LearnerKind::tuned()
        .into_iter()
        .map(|kind| {
            let params: Vec<OptionNode> = kind
                .param_domains()
                .iter()
                .map(|pd| param_node(&pd.name, &pd.domain))
                .collect();
            OptionNode::new(kind.name(), NodePayload::Params(params))
        })
        .collect();

    OptionTree {
        task,
        preproc_root: OptionNode::new("preprocessor", NodePayload::Choice(preproc_children)),
        learner_root: OptionNode::new("learner", NodePayload::Choice(learner_children)),
    }
}

impl OptionTree {
    /// Add the linear SVM (no tunables) to the learner choices. It is kept
    /// out of the default tree and only participates when explicitly
    /// enabled.
    pub fn enable_linear_svm(&mut self) {
        let children = self.learner_root.children_mut().expect("learner root is a choice");
        if !children.iter().any(|c| c.label == LearnerKind::LinearSvm.name()) {
            children
                .push(OptionNode::new(LearnerKind::LinearSvm.name(), NodePayload::Params(vec![])));
        }
    }

    /// Uniform branch choices, numeric leaves drawn from their current
    /// ranges.
    pub fn sample_random(&self, rng: &mut StdRng) -> TuningChoice {
        self.sample(SelectMode::Uniform, rng)
    }

    /// At each branch level pick a child of maximal weight (ties uniform at
    /// random); numeric leaves draw from their narrowed ranges.
    pub fn weighted_descent(&self, rng: &mut StdRng) -> TuningChoice {
        self.sample(SelectMode::Weighted, rng)
    }

    fn sample(&self, mode: SelectMode, rng: &mut StdRng) -> TuningChoice {
        let mut path = Vec::new();
        let mut numeric_samples = Vec::new();
        let (p_label, p_params) =
            sample_branch(&self.preproc_root, mode, rng, &mut path, &mut numeric_samples);
        let (l_label, l_params) =
            sample_branch(&self.learner_root, mode, rng, &mut path, &mut numeric_samples);

        let preproc = PreprocSpec {
            kind: preproc_kind_by_name(&p_label).expect("tree labels are preprocessor names"),
            params: p_params,
        };
        let learner = LearnerSpec {
            kind: learner_kind_by_name(&l_label).expect("tree labels are learner names"),
            params: l_params,
        };
        debug_assert!(preproc.validate().is_ok() && learner.validate().is_ok());
        TuningChoice { preproc, learner, path, numeric_samples }
    }

    /// Add `delta` (+1 endorse, -1 deprecate) to every node on the choice's
    /// path. Fails on a path that no longer matches the tree.
    pub fn reweight(&mut self, choice: &TuningChoice, delta: i64) -> Result<()> {
        for address in &choice.path {
            let node = self.node_mut(address).ok_or_else(|| {
                Error::InvalidData(format!("stale option path: '{address}' is not in the tree"))
            })?;
            node.weight += delta;
        }
        Ok(())
    }

    /// Record an evaluation's score against every numeric leaf the choice
    /// sampled, then narrow each touched leaf around its best/worst values.
    /// `higher_is_better` orients the comparison.
    pub fn record_numeric_outcome(
        &mut self,
        choice: &TuningChoice,
        score: f64,
        higher_is_better: bool,
    ) -> Result<()> {
        for (address, value) in &choice.numeric_samples {
            let node = self.node_mut(address).ok_or_else(|| {
                Error::InvalidData(format!("stale option path: '{address}' is not in the tree"))
            })?;
            let NodePayload::Numeric(leaf) = &mut node.payload else {
                return Err(Error::InvalidData(format!("'{address}' is not a numeric leaf")));
            };
            let better = |s: f64, than: f64| if higher_is_better { s > than } else { s < than };
            match leaf.best {
                Some((_, bs)) if !better(score, bs) => {}
                _ => leaf.best = Some((*value, score)),
            }
            match leaf.worst {
                Some((_, ws)) if !better(ws, score) => {}
                _ => leaf.worst = Some((*value, score)),
            }
            if let (Some((b, _)), Some((w, _))) = (leaf.best, leaf.worst) {
                narrow_range(leaf, b, w);
            }
        }
        Ok(())
    }

    pub fn node(&self, address: &str) -> Option<&OptionNode> {
        let parts: Vec<&str> = address.split('/').collect();
        match parts.first() {
            Some(&"preprocessor") => self.preproc_root.find(&parts[1..]),
            Some(&"learner") => self.learner_root.find(&parts[1..]),
            _ => None,
        }
    }

    fn node_mut(&mut self, address: &str) -> Option<&mut OptionNode> {
        let parts: Vec<&str> = address.split('/').collect();
        match parts.first() {
            Some(&"preprocessor") => self.preproc_root.find_mut(&parts[1..]),
            Some(&"learner") => self.learner_root.find_mut(&parts[1..]),
            _ => None,
        }
    }

    pub fn weight_of(&self, address: &str) -> Option<i64> {
        self.node(address).map(|n| n.weight)
    }

    /// JSON dump of the whole tree for audit trails.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("option tree serializes")
    }
}

fn preproc_kind_by_name(name: &str) -> Option<PreprocKind> {
    PreprocKind::defect_kinds()
        .into_iter()
        .chain(PreprocKind::text_kinds())
        .find(|k| k.name() == name)
}

fn learner_kind_by_name(name: &str) -> Option<LearnerKind> {
    LearnerKind::tuned()
        .into_iter()
        .chain([LearnerKind::LinearSvm])
        .find(|k| k.name() == name)
}

/// Descend one root: choose a kind, then sample all of its parameters.
/// Returns the kind label and the sampled parameter map.
fn sample_branch(
    root: &OptionNode,
    mode: SelectMode,
    rng: &mut StdRng,
    path: &mut Vec<String>,
    numeric_samples: &mut Vec<(String, f64)>,
) -> (String, BTreeMap<String, ParamValue>) {
    path.push(root.label.clone());
    let kinds = root.children().expect("root is a choice node");
    let kind = select_child(kinds, mode, rng);
    let kind_addr = format!("{}/{}", root.label, kind.label);
    path.push(kind_addr.clone());

    let mut params = BTreeMap::new();
    let param_nodes = kind.children().expect("kind nodes hold parameter lists");
    for param in param_nodes {
        // the Minkowski exponent only exists under the minkowski metric
        if kind.label == "KNeighbors"
            && param.label == "p"
            && params.get("metric").and_then(|v: &ParamValue| v.as_str()) == Some("chebyshev")
        {
            params.insert("p".to_string(), ParamValue::Int(2));
            continue;
        }
        let param_addr = format!("{kind_addr}/{}", param.label);
        path.push(param_addr.clone());
        match &param.payload {
            NodePayload::Numeric(leaf) => {
                let value = leaf.sample(rng);
                numeric_samples.push((param_addr, value));
                let pv = if leaf.integer {
                    ParamValue::Int(value as i64)
                } else {
                    ParamValue::Real(value)
                };
                params.insert(param.label.clone(), pv);
            }
            NodePayload::Choice(values) => {
                let value = select_child(values, mode, rng);
                path.push(format!("{param_addr}/{}", value.label));
                let NodePayload::Value(pv) = &value.payload else {
                    unreachable!("choice children under params are value leaves");
                };
                params.insert(param.label.clone(), pv.clone());
            }
            _ => unreachable!("parameter nodes are numeric or categorical"),
        }
    }
    (kind.label.clone(), params)
}

fn select_child<'a>(children: &'a [OptionNode], mode: SelectMode, rng: &mut StdRng) -> &'a OptionNode {
    match mode {
        SelectMode::Uniform => &children[rng.gen_range(0..children.len())],
        SelectMode::Weighted => {
            let max = children.iter().map(|c| c.weight).max().expect("non-empty choice");
            let tied: Vec<&OptionNode> = children.iter().filter(|c| c.weight == max).collect();
            tied[rng.gen_range(0..tied.len())]
        }
    }
}

/// Shrink a numeric leaf's live range to `(b, (b+w)/2)`, reordered when the
/// formula inverts, and clipped to the original bounds.
pub fn narrow_range(leaf: &mut NumericLeaf, best: f64, worst: f64) {
    let mid = (best + worst) / 2.0;
    let (lo, hi) = (best.min(mid), best.max(mid));
    leaf.lo = lo.max(leaf.original_lo);
    leaf.hi = hi.min(leaf.original_hi);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn rng(seed: u64) -> StdRng {
        StdRng::seed_from_u64(seed)
    }

    #[test]
    fn defect_tree_shape_matches_the_option_table() {
        let tree = build_table1_tree(TaskKind::Defect);
        assert_eq!(tree.learner_root.children().unwrap().len(), 5);
        assert_eq!(tree.preproc_root.children().unwrap().len(), 10);
        let text = build_table1_tree(TaskKind::Text);
        assert_eq!(text.preproc_root.children().unwrap().len(), 4);
        assert_eq!(text.learner_root.children().unwrap().len(), 5);
    }

    #[test]
    fn numeric_leaf_ranges_match_the_table() {
        let tree = build_table1_tree(TaskKind::Defect);
        let knn = tree.node("learner/KNeighbors/n_neighbors").unwrap();
        let NodePayload::Numeric(leaf) = &knn.payload else { panic!("expected numeric leaf") };
        assert_eq!((leaf.lo, leaf.hi), (2.0, 25.0));
        let rf = tree.node("learner/RandomForest/n_estimators").unwrap();
        let NodePayload::Numeric(leaf) = &rf.payload else { panic!("expected numeric leaf") };
        assert_eq!((leaf.lo, leaf.hi), (50.0, 150.0));
    }

    #[test]
    fn thousand_random_samples_cover_every_preprocessor() {
        let tree = build_table1_tree(TaskKind::Defect);
        let mut r = rng(0xC0FFEE);
        let mut seen = HashSet::new();
        for _ in 0..1000 {
            seen.insert(tree.sample_random(&mut r).preproc.kind);
        }
        assert_eq!(seen.len(), 10, "all preprocessor kinds should appear");
    }

    #[test]
    fn sampled_values_stay_in_range_and_validate() {
        let tree = build_table1_tree(TaskKind::Defect);
        let mut r = rng(5);
        for _ in 0..500 {
            let c = tree.sample_random(&mut r);
            c.preproc.validate().unwrap();
            c.learner.validate().unwrap();
            if c.learner.kind == LearnerKind::DecisionTree {
                let v = c.learner.params["min_samples_split"].as_f64().unwrap();
                assert!((0.0..=1.0).contains(&v));
            }
            if c.learner.kind == LearnerKind::Knn {
                let metric = c.learner.params["metric"].as_str().unwrap();
                let p = c.learner.params["p"].as_i64().unwrap();
                if metric == "chebyshev" {
                    assert_eq!(p, 2);
                }
                assert!((1..=15).contains(&p));
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_under_seed() {
        let tree = build_table1_tree(TaskKind::Text);
        let a: Vec<String> = {
            let mut r = rng(11);
            (0..50).map(|_| format!("{:?}", tree.sample_random(&mut r))).collect()
        };
        let b: Vec<String> = {
            let mut r = rng(11);
            (0..50).map(|_| format!("{:?}", tree.sample_random(&mut r))).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn all_zero_weights_descend_uniformly_enough() {
        let tree = build_table1_tree(TaskKind::Defect);
        let mut r = rng(3);
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for _ in 0..5000 {
            let kind = tree.weighted_descent(&mut r).learner.kind;
            *counts.entry(kind.name().to_string()).or_insert(0) += 1;
        }
        for (kind, &n) in &counts {
            let share = n as f64 / 5000.0;
            assert!((share - 0.2).abs() < 0.05, "{kind} drawn {share}");
        }
    }

    #[test]
    fn unique_argmax_is_always_selected() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        tree.node_mut("learner/MultinomialNB").unwrap().weight = 3;
        for child in tree.learner_root.children_mut().unwrap() {
            if child.label != "MultinomialNB" {
                child.weight = -1;
            }
        }
        let mut r = rng(7);
        for _ in 0..200 {
            assert_eq!(tree.weighted_descent(&mut r).learner.kind, LearnerKind::MultinomialNb);
        }
    }

    #[test]
    fn tied_argmax_splits_roughly_evenly() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        for child in tree.learner_root.children_mut().unwrap() {
            child.weight = match child.label.as_str() {
                "DecisionTree" | "KNeighbors" => 2,
                _ => -5,
            };
        }
        let mut r = rng(13);
        let mut dt = 0;
        let n = 10_000;
        for _ in 0..n {
            if tree.weighted_descent(&mut r).learner.kind == LearnerKind::DecisionTree {
                dt += 1;
            }
        }
        let share = dt as f64 / n as f64;
        assert!((share - 0.5).abs() < 0.03, "tie split was {share}");
    }

    #[test]
    fn all_negative_weights_still_yield_valid_choices() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let mut r = rng(1);
        for _ in 0..20 {
            let c = tree.sample_random(&mut r);
            tree.reweight(&c, -1).unwrap();
        }
        let c = tree.weighted_descent(&mut r);
        c.learner.validate().unwrap();
        c.preproc.validate().unwrap();
    }

    #[test]
    fn endorse_then_deprecate_restores_zero() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let c = tree.sample_random(&mut rng(2));
        tree.reweight(&c, 1).unwrap();
        tree.reweight(&c, -1).unwrap();
        for address in &c.path {
            assert_eq!(tree.weight_of(address), Some(0), "{address}");
        }
    }

    #[test]
    fn reweight_touches_exactly_the_path_and_nothing_else() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let c = tree.sample_random(&mut rng(4));
        tree.reweight(&c, 1).unwrap();
        // every path node gained exactly +1
        for address in &c.path {
            assert_eq!(tree.weight_of(address), Some(1), "{address}");
        }
        // a depth-3 learner branch (root, kind, alpha) for MultinomialNB
        let learner_nodes = c.path.iter().filter(|a| a.starts_with("learner")).count();
        if c.learner.kind == LearnerKind::MultinomialNb {
            assert_eq!(learner_nodes, 3);
        }
        // untouched siblings stay at zero
        for kind in LearnerKind::tuned() {
            let addr = format!("learner/{}", kind.name());
            if !c.path.contains(&addr) {
                assert_eq!(tree.weight_of(&addr), Some(0));
            }
        }
    }

    #[test]
    fn stale_paths_are_rejected() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let mut c = tree.sample_random(&mut rng(6));
        c.path.push("learner/NoSuchLearner".into());
        assert!(tree.reweight(&c, 1).is_err());
    }

    #[test]
    fn narrowing_examples_from_the_rule() {
        let mut leaf = NumericLeaf::new(0.0, 100.0, false);
        narrow_range(&mut leaf, 10.0, 90.0);
        assert_eq!((leaf.lo, leaf.hi), (10.0, 50.0));

        let mut leaf = NumericLeaf::new(0.0, 100.0, false);
        narrow_range(&mut leaf, 90.0, 10.0);
        assert_eq!((leaf.lo, leaf.hi), (50.0, 90.0));

        let mut leaf = NumericLeaf::new(0.0, 100.0, false);
        narrow_range(&mut leaf, 42.0, 42.0);
        assert_eq!((leaf.lo, leaf.hi), (42.0, 42.0));
        let mut r = rng(8);
        for _ in 0..10 {
            assert_eq!(leaf.sample(&mut r), 42.0);
        }
    }

    #[test]
    fn narrowed_ranges_stay_inside_originals() {
        let mut tree = build_table1_tree(TaskKind::Defect);
        let mut r = rng(10);
        for i in 0..200 {
            let c = tree.sample_random(&mut r);
            tree.record_numeric_outcome(&c, (i % 17) as f64 / 17.0, false).unwrap();
        }
        fn walk(node: &OptionNode) {
            if let NodePayload::Numeric(leaf) = &node.payload {
                assert!(leaf.lo >= leaf.original_lo && leaf.hi <= leaf.original_hi);
                assert!(leaf.lo <= leaf.hi);
            }
            if let Some(children) = node.children() {
                children.iter().for_each(walk);
            }
        }
        walk(&tree.preproc_root);
        walk(&tree.learner_root);
    }

    #[test]
    fn tree_serializes_to_json() {
        let tree = build_table1_tree(TaskKind::Text);
        let json = tree.to_json();
        let back: OptionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back.learner_root.children().unwrap().len(), 5);
    }

    #[test]
    fn linear_svm_joins_the_learners_only_when_enabled() {
        let mut tree = build_table1_tree(TaskKind::Text);
        assert_eq!(tree.learner_root.children().unwrap().len(), 5);
        tree.enable_linear_svm();
        tree.enable_linear_svm(); // idempotent
        assert_eq!(tree.learner_root.children().unwrap().len(), 6);
        let mut r = rng(19);
        let svm_seen = (0..200)
            .map(|_| tree.sample_random(&mut r))
            .any(|c| c.learner.kind == LearnerKind::LinearSvm);
        assert!(svm_seen);
    }
}
