use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::{softmax, softmax_gradient, softmax_hessian, softmax_log_loss};
use super::tree::{GradientFit, RegressionTree};
use super::{Classifier, FeatureVector, LabeledRecord, FEATURE_COUNT};
use crate::{Error, Real, Result};

/// L2 penalty on leaf values.
pub const LAMBDA: f64 = 1.0;
/// Smallest hessian sum allowed in a child.
pub const MIN_CHILD_WEIGHT: f64 = 1.0;
/// Splits must improve the objective by more than this.
pub const MIN_SPLIT_GAIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtParams<T = f64> {
    pub learning_rate: T,
    pub max_depth: usize,
    pub n_estimators: usize,
    pub n_classes: usize,
}

impl<T: Real> Default for GbdtParams<T> {
    fn default() -> Self {
        GbdtParams {
            learning_rate: T::lit(0.3),
            max_depth: 3,
            n_estimators: 3,
            n_classes: 2,
        }
    }
}

/// Softmax ensemble. `trees` holds `n_estimators * n_classes` trees, round
/// by round, with the tree for class `c` of round `r` at `r * n_classes + c`.
/// Leaf values already include the learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel<T = f64> {
    pub n_classes: usize,
    pub learning_rate: T,
    pub base_score: T,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub trees: Vec<RegressionTree<T>>,
}

pub(crate) fn to_scalars<T: Real>(x: &FeatureVector) -> [T; FEATURE_COUNT] {
    x.to_array().map(T::lit)
}

impl<T: Real> GbdtModel<T> {
    /// A model with no trees; predicts the uniform distribution.
    pub fn untrained(n_classes: usize, learning_rate: T, max_depth: usize) -> Self {
        GbdtModel {
            n_classes,
            learning_rate,
            base_score: T::lit(0.5),
            n_estimators: 0,
            max_depth,
            trees: Vec::new(),
        }
    }

    pub fn raw_scores(&self, x: &FeatureVector) -> Vec<T> {
        self.scores_of(&to_scalars(x))
    }

    fn scores_of(&self, x: &[T; FEATURE_COUNT]) -> Vec<T> {
        let mut scores = vec![self.base_score; self.n_classes];
        for (i, tree) in self.trees.iter().enumerate() {
            scores[i % self.n_classes] += tree.eval(x);
        }
        scores
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> Vec<T> {
        softmax(&self.raw_scores(x))
    }

    /// Structural invariants: tree count, depth bound and node references.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ModelFormat(m));
        if self.n_classes < 2 {
            return bad(format!("n_classes must be at least 2, got {}", self.n_classes));
        }
        if !(self.learning_rate > T::zero() && self.learning_rate <= T::one()) {
            return bad(format!("learning_rate {} outside (0, 1]", self.learning_rate));
        }
        if !self.base_score.is_finite() {
            return bad("base_score is not finite".into());
        }
        if self.trees.len() != self.n_estimators * self.n_classes {
            return bad(format!(
                "expected {} trees, found {}",
                self.n_estimators * self.n_classes,
                self.trees.len()
            ));
        }
        for (i, tree) in self.trees.iter().enumerate() {
            tree.validate().or_else(|e| bad(format!("tree {i}: {e}")))?;
            if tree.depth() > self.max_depth {
                return bad(format!("tree {i} deeper than max_depth {}", self.max_depth));
            }
        }
        Ok(())
    }
}

fn argmax<T: Real>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl<T: Real> Classifier for GbdtModel<T> {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Argmax of the class probabilities, lowest class on ties.
    fn predict_class(&self, x: &FeatureVector) -> usize {
        argmax(&self.predict_proba(x))
    }
}

pub(crate) fn check_training_data(data: &[LabeledRecord], n_classes: usize) -> Result<()> {
    if data.is_empty() {
        return Err(Error::invalid("training data is empty"));
    }
    if n_classes < 2 {
        return Err(Error::invalid("n_classes must be at least 2"));
    }
    if let Some(r) = data.iter().find(|r| r.label >= n_classes) {
        return Err(Error::invalid(format!("label {} not below n_classes {n_classes}", r.label)));
    }
    if data.iter().all(|r| r.label == data[0].label) {
        return Err(Error::DegenerateLabels);
    }
    Ok(())
}

/// Shuffles with `seed`; the only randomness in training.
pub(crate) fn shuffled(data: &[LabeledRecord], seed: u64) -> Vec<LabeledRecord> {
    let mut rows = data.to_vec();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    rows
}

pub fn train_gbdt<T: Real>(data: &[LabeledRecord], params: &GbdtParams<T>, seed: u64) -> Result<GbdtModel<T>> {
    train_gbdt_traced(data, params, seed).map(|(m, _)| m)
}

/// Like [`train_gbdt`], also returning the mean training log-loss before
/// the first round and after each round.
pub fn train_gbdt_traced<T: Real>(
    data: &[LabeledRecord],
    params: &GbdtParams<T>,
    seed: u64,
) -> Result<(GbdtModel<T>, Vec<T>)> {
    let k = params.n_classes;
    check_training_data(data, k)?;
    if !(params.learning_rate > T::zero() && params.learning_rate <= T::one()) {
        return Err(Error::invalid("learning_rate must lie in (0, 1]"));
    }

    let rows = shuffled(data, seed);
    let n = rows.len();
    let xs: Vec<[T; FEATURE_COUNT]> = rows.iter().map(|r| to_scalars(&r.features)).collect();
    let labels: Vec<usize> = rows.iter().map(|r| r.label).collect();

    let mut model = GbdtModel::untrained(k, params.learning_rate, params.max_depth);
    let mut scores: Vec<Vec<T>> = vec![vec![model.base_score; k]; n];
    let mean_loss = |scores: &[Vec<T>]| {
        scores
            .iter()
            .zip(&labels)
            .fold(T::zero(), |acc, (s, &y)| acc + softmax_log_loss(s, y))
            / T::from_count(n)
    };
    let mut trace = vec![mean_loss(&scores)];

    let mut grad = vec![vec![T::zero(); n]; k];
    let mut hess = vec![vec![T::zero(); n]; k];
    for _ in 0..params.n_estimators {
        for (i, s) in scores.iter().enumerate() {
            let g = softmax_gradient(s, labels[i]);
            let h = softmax_hessian(s);
            for c in 0..k {
                grad[c][i] = g[c];
                hess[c][i] = h[c];
            }
        }
        for c in 0..k {
            let tree = GradientFit {
                xs: &xs,
                grad: &grad[c],
                hess: &hess[c],
                lambda: T::lit(LAMBDA),
                min_child_weight: T::lit(MIN_CHILD_WEIGHT),
                min_split_gain: T::lit(MIN_SPLIT_GAIN),
                shrinkage: params.learning_rate,
                max_depth: params.max_depth,
            }
            .fit((0..n).collect());
            model.trees.push(tree);
        }
        model.n_estimators += 1;
        let round = &model.trees[model.trees.len() - k..];
        for (i, s) in scores.iter_mut().enumerate() {
            for (c, tree) in round.iter().enumerate() {
                s[c] += tree.eval(&xs[i]);
            }
        }
        trace.push(mean_loss(&scores));
    }
    Ok((model, trace))
}
