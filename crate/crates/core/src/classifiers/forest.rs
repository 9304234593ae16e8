//! Random forest of Gini decision trees over sparse features.
//!
//! Each tree sees a bootstrap sample and considers `max_features` random
//! candidate features per node. Tree `i` draws from its own RNG seeded with
//! `seed + i`, so the forest is identical however many threads build it.
//!
//! Split search gathers the node's values for each candidate either by
//! walking the node's rows or by walking the candidates' columns, whichever
//! touches fewer stored entries. Implicit zeros are handled as one bucket.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_data, ClassifierError, Prediction};
use crate::corpus::Label;
use crate::vectorize::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    /// Candidate features per node; `None` means `floor(sqrt(dim))`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            max_depth: None,
            min_samples_leaf: 1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: Label,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, x: &SparseVector) -> Label {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x.get(*feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left as usize).max(go(nodes, *right as usize)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    trees: Vec<DecisionTree>,
    dim: usize,
    params: RfParams,
}

impl RfModel {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &RfParams {
        &self.params
    }

    /// A forest assembled from prebuilt trees.
    pub fn from_trees(trees: Vec<DecisionTree>, dim: usize) -> Self {
        Self {
            params: RfParams {
                n_trees: trees.len(),
                ..RfParams::default()
            },
            trees,
            dim,
        }
    }

    /// Score is the fraction of trees voting spam; margin is
    /// `2 * score - 1`.
    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let votes = self.trees.iter().filter(|t| t.predict(x).is_spam()).count();
        let score = votes as f64 / self.trees.len().max(1) as f64;
        Prediction::from_score(score, 2.0 * score - 1.0)
    }
}

/// Column-major copy of the training matrix.
struct Columns {
    entries: Vec<Vec<(u32, f64)>>,
}

impl Columns {
    fn build(x: &[SparseVector], dim: usize) -> Self {
        let mut entries = vec![Vec::new(); dim];
        for (r, row) in x.iter().enumerate() {
            for (j, v) in row.iter() {
                entries[j as usize].push((r as u32, v));
            }
        }
        Self { entries }
    }
}

struct TrainData<'a> {
    rows: &'a [SparseVector],
    cols: Columns,
    spam: Vec<bool>,
    dim: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    impurity: f64,
    feature: u32,
    threshold: f64,
}

/// Weighted values of one feature within a node: `(value, spam, total)`.
type Bucket = Vec<(f64, u32, u32)>;

struct TreeBuilder<'a> {
    data: &'a TrainData<'a>,
    rng: ChaCha8Rng,
    max_features: usize,
    max_depth: usize,
    min_leaf: u32,
    nodes: Vec<Node>,
    multiplicity: Vec<u32>,
    slot: Vec<u32>,
    buckets: Vec<Bucket>,
}

const NO_SLOT: u32 = u32::MAX;

fn gini_sum(spam: u32, total: u32) -> f64 {
    // total * gini = total - (spam^2 + ham^2) / total
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let s = spam as f64;
    let h = t - s;
    t - (s * s + h * h) / t
}

impl<'a> TreeBuilder<'a> {
    fn new(data: &'a TrainData<'a>, params: &RfParams, seed: u64) -> Self {
        let default_mf = ((data.dim as f64).sqrt().floor() as usize).max(1);
        Self {
            data,
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_features: params.max_features.unwrap_or(default_mf).clamp(1, data.dim.max(1)),
            max_depth: params.max_depth.unwrap_or(usize::MAX),
            min_leaf: params.min_samples_leaf.max(1) as u32,
            nodes: Vec::new(),
            multiplicity: vec![0; data.rows.len()],
            slot: vec![NO_SLOT; data.dim],
            buckets: Vec::new(),
        }
    }

    fn build(mut self) -> DecisionTree {
        let n = self.data.rows.len();
        let samples: Vec<u32> = (0..n).map(|_| self.rng.gen_range(0..n as u32)).collect();
        self.nodes.push(Node::Leaf { label: Label::Spam });
        let mut stack = vec![(0usize, samples, 0usize)];
        while let Some((id, samples, depth)) = stack.pop() {
            let spam = samples.iter().filter(|&&s| self.data.spam[s as usize]).count() as u32;
            let total = samples.len() as u32;
            let label = Label::from(2 * spam >= total);
            if spam == 0 || spam == total || depth >= self.max_depth || total < 2 * self.min_leaf {
                self.nodes[id] = Node::Leaf { label };
                continue;
            }
            let Some(split) = self.find_split(&samples, spam, total) else {
                self.nodes[id] = Node::Leaf { label };
                continue;
            };
            let (left, right): (Vec<u32>, Vec<u32>) = samples
                .iter()
                .partition(|&&s| self.data.rows[s as usize].get(split.feature as usize) <= split.threshold);
            let l = self.nodes.len();
            self.nodes.push(Node::Leaf { label });
            self.nodes.push(Node::Leaf { label });
            self.nodes[id] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: l as u32,
                right: l as u32 + 1,
            };
            // right pushed first so the left subtree is expanded first
            stack.push((l + 1, right, depth + 1));
            stack.push((l, left, depth + 1));
        }
        DecisionTree { nodes: self.nodes }
    }

    fn find_split(&mut self, samples: &[u32], spam: u32, total: u32) -> Option<Candidate> {
        let dim = self.data.dim;
        let k = self.max_features.min(dim);
        let drawn: Vec<u32> = index::sample(&mut self.rng, dim, k).into_iter().map(|f| f as u32).collect();
        if let Some(c) = self.best_among(&drawn, samples, spam, total) {
            return Some(c);
        }
        // every drawn feature is constant here: retry with features that have
        // stored values in this node
        let mut present: Vec<u32> = samples
            .iter()
            .flat_map(|&s| self.data.rows[s as usize].indices().iter().copied())
            .collect();
        present.sort_unstable();
        present.dedup();
        present.retain(|f| !drawn.contains(f));
        if present.is_empty() {
            return None;
        }
        present.shuffle(&mut self.rng);
        present.truncate(k);
        present.sort_unstable();
        self.best_among(&present, samples, spam, total)
    }

    fn gather(&mut self, features: &[u32], samples: &[u32]) {
        self.buckets.resize_with(features.len(), Vec::new);
        self.buckets.truncate(features.len());
        self.buckets.iter_mut().for_each(Vec::clear);

        let row_cost: usize = samples.iter().map(|&s| self.data.rows[s as usize].nnz()).sum();
        let col_cost: usize = features.iter().map(|&f| self.data.cols.entries[f as usize].len()).sum::<usize>() + samples.len();

        if row_cost <= col_cost {
            for (p, &f) in features.iter().enumerate() {
                self.slot[f as usize] = p as u32;
            }
            for &s in samples {
                let is_spam = self.data.spam[s as usize] as u32;
                for (j, v) in self.data.rows[s as usize].iter() {
                    let p = self.slot[j as usize];
                    if p != NO_SLOT {
                        self.buckets[p as usize].push((v, is_spam, 1));
                    }
                }
            }
            for &f in features {
                self.slot[f as usize] = NO_SLOT;
            }
        } else {
            for &s in samples {
                self.multiplicity[s as usize] += 1;
            }
            for (p, &f) in features.iter().enumerate() {
                for &(r, v) in &self.data.cols.entries[f as usize] {
                    let m = self.multiplicity[r as usize];
                    if m > 0 {
                        let is_spam = self.data.spam[r as usize] as u32;
                        self.buckets[p].push((v, is_spam * m, m));
                    }
                }
            }
            for &s in samples {
                self.multiplicity[s as usize] = 0;
            }
        }
    }

    fn best_among(&mut self, features: &[u32], samples: &[u32], spam: u32, total: u32) -> Option<Candidate> {
        self.gather(features, samples);
        let mut best: Option<Candidate> = None;
        for (p, &f) in features.iter().enumerate() {
            let bucket = &mut self.buckets[p];
            let nz_spam: u32 = bucket.iter().map(|e| e.1).sum();
            let nz_total: u32 = bucket.iter().map(|e| e.2).sum();
            if nz_total < total {
                bucket.push((0.0, spam - nz_spam, total - nz_total));
            }
            bucket.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if let Some(c) = scan_thresholds(bucket, f, spam, total, self.min_leaf) {
                if best.is_none_or(|b| c.impurity < b.impurity) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

/// Best threshold over sorted `(value, spam, total)` entries.
fn scan_thresholds(sorted: &[(f64, u32, u32)], feature: u32, spam: u32, total: u32, min_leaf: u32) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    let (mut ls, mut lt) = (0u32, 0u32);
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == v {
            ls += sorted[i].1;
            lt += sorted[i].2;
            i += 1;
        }
        if i == sorted.len() {
            break;
        }
        if lt < min_leaf || total - lt < min_leaf {
            continue;
        }
        let next = sorted[i].0;
        let mut threshold = v + (next - v) / 2.0;
        if threshold >= next {
            threshold = v;
        }
        let impurity = gini_sum(ls, lt) + gini_sum(spam - ls, total - lt);
        if best.is_none_or(|b| impurity < b.impurity) {
            best = Some(Candidate {
                impurity,
                feature,
                threshold,
            });
        }
    }
    best
}

fn build_trees(data: &TrainData<'_>, params: &RfParams) -> Vec<DecisionTree> {
    let build = |i: usize| TreeBuilder::new(data, params, params.seed.wrapping_add(i as u64)).build();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..params.n_trees).into_par_iter().map(build).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..params.n_trees).map(build).collect()
    }
}

/// Trains a forest. Trees grow until their leaves are pure (or no split is
/// possible), subject to the optional depth limit.
pub fn train_rf(x: &[SparseVector], y: &[Label], params: &RfParams) -> Result<RfModel, ClassifierError> {
    if params.n_trees == 0 {
        return Err(ClassifierError::InvalidHyperparameter("n_trees must be at least 1".into()));
    }
    if params.max_features == Some(0) {
        return Err(ClassifierError::InvalidHyperparameter("max_features must be at least 1".into()));
    }
    let dim = check_training_data(x, y, 2)?;
    let data = TrainData {
        rows: x,
        cols: Columns::build(x, dim),
        spam: y.iter().map(|l| l.is_spam()).collect(),
        dim,
    };
    Ok(RfModel {
        trees: build_trees(&data, params),
        dim,
        params: *params,
    })
}
