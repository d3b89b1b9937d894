use serde::{Deserialize, Serialize};

use super::boost::{check_training_data, shuffled};
use super::{Classifier, FeatureVector, LabeledRecord, FEATURE_COUNT};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CartNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

/// Single classification tree grown with the gini criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_classes: usize,
    pub max_depth: usize,
    pub nodes: Vec<CartNode>,
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[CartNode], i: usize) -> usize {
            match nodes[i] {
                CartNode::Leaf { .. } => 0,
                CartNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl Classifier for DecisionTree {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_class(&self, x: &FeatureVector) -> usize {
        let x = x.to_array();
        let mut i = 0;
        loop {
            match self.nodes[i] {
                CartNode::Leaf { class } => return class,
                CartNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
            }
        }
    }
}

/// `n` times the gini impurity of `counts`.
fn gini_weighted(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: usize = counts.iter().map(|&c| c * c).sum();
    n as f64 - sq as f64 / n as f64
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

struct Grower<'a> {
    xs: &'a [[f64; FEATURE_COUNT]],
    ys: &'a [usize],
    n_classes: usize,
    max_depth: usize,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &r in rows {
            c[self.ys[r]] += 1;
        }
        c
    }

    fn grow(&self, rows: Vec<usize>, depth: usize, nodes: &mut Vec<CartNode>) -> usize {
        let id = nodes.len();
        let counts = self.counts(&rows);
        nodes.push(CartNode::Leaf { class: majority(&counts) });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.max_depth || pure {
            return id;
        }
        let parent = gini_weighted(&counts, rows.len());
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = rows.clone();
        for f in 0..FEATURE_COUNT {
            order.sort_by(|&a, &b| self.xs[a][f].total_cmp(&self.xs[b][f]));
            let mut left = vec![0; self.n_classes];
            let mut right = counts.clone();
            for w in 0..order.len() - 1 {
                let y = self.ys[order[w]];
                left[y] += 1;
                right[y] -= 1;
                let (lo, hi) = (self.xs[order[w]][f], self.xs[order[w + 1]][f]);
                if lo >= hi {
                    continue;
                }
                let nl = w + 1;
                let gain = parent - gini_weighted(&left, nl) - gini_weighted(&right, order.len() - nl);
                if gain > 1e-12 && best.map_or(true, |b| gain > b.2) {
                    let mid = 0.5 * (lo + hi);
                    best = Some((f, if mid > lo { mid } else { hi }, gain));
                }
            }
        }
        let Some((feature, threshold, _)) = best else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.xs[i][feature] < threshold);
        let left = self.grow(l, depth + 1, nodes);
        let right = self.grow(r, depth + 1, nodes);
        nodes[id] = CartNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// CART tree with majority-vote leaves (lowest class on ties). The class
/// count is the largest label plus one, and at least two. `max_depth = 0`
/// yields a majority-class predictor.
pub fn train_decision_tree(data: &[LabeledRecord], max_depth: usize, seed: u64) -> Result<DecisionTree> {
    let n_classes = data.iter().map(|r| r.label + 1).max().unwrap_or(0).max(2);
    check_training_data(data, n_classes)?;
    let rows = shuffled(data, seed);
    let xs: Vec<_> = rows.iter().map(|r| r.features.to_array()).collect();
    let ys: Vec<_> = rows.iter().map(|r| r.label).collect();
    let grower = Grower {
        xs: &xs,
        ys: &ys,
        n_classes,
        max_depth,
    };
    let mut nodes = Vec::new();
    grower.grow((0..rows.len()).collect(), 0, &mut nodes);
    Ok(DecisionTree {
        n_classes,
        max_depth,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Vec<LabeledRecord> {
        (0..20)
            .map(|i| LabeledRecord {
                features: FeatureVector::new(4096.0, 2.0, 2.0, 4096.0, 4.0, (i + 1) as f64, 1.0).unwrap(),
                label: usize::from(i >= 10),
            })
            .collect()
    }

    #[test]
    fn separable_toy_set() {
        let tree = train_decision_tree(&toy(), 3, 0).unwrap();
        assert!(toy().iter().all(|r| tree.predict_class(&r.features) == r.label));
        assert_eq!(tree.depth(), 1);
        assert!(matches!(tree.nodes[0], CartNode::Split { feature: 5, threshold, .. } if threshold == 10.5));
    }

    #[test]
    fn depth_zero_is_majority() {
        let data = &toy()[7..];
        let tree = train_decision_tree(data, 0, 0).unwrap();
        assert_eq!(tree.nodes, vec![CartNode::Leaf { class: 1 }]);
        // Tie goes to the lower class.
        let tree = train_decision_tree(&toy(), 0, 0).unwrap();
        assert_eq!(tree.nodes, vec![CartNode::Leaf { class: 0 }]);
    }

    #[test]
    fn greedy_stops_on_xor() {
        let mut data = Vec::new();
        for (a, b) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0)] {
            for rep in 0..3 {
                data.push(LabeledRecord {
                    features: FeatureVector::new(a, b, 1.0, 1.0, 1.0, 1.0 + rep as f64, 1.0).unwrap(),
                    label: usize::from(a != b),
                });
            }
        }
        // Every single cut leaves both sides balanced, so no gini gain at the root.
        let shallow = train_decision_tree(&data, 2, 0).unwrap();
        assert_eq!(shallow.nodes.len(), 1);
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(
            train_decision_tree(&toy(), 4, 9).unwrap(),
            train_decision_tree(&toy(), 4, 9).unwrap()
        );
    }
}
