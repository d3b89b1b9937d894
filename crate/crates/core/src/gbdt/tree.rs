use serde::{Deserialize, Serialize};

use super::FEATURE_COUNT;
use crate::Real;

/// One node of a regression tree. Internal nodes send `x[feature] < threshold`
/// to `left` and everything else to `right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode<T> {
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: T,
    },
}

/// Nodes in preorder; the root is `nodes[0]` and children always come after
/// their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree<T> {
    pub nodes: Vec<TreeNode<T>>,
}

impl<T: Real> RegressionTree<T> {
    pub fn leaf(value: T) -> Self {
        RegressionTree {
            nodes: vec![TreeNode::Leaf { leaf: value }],
        }
    }

    pub fn eval(&self, x: &[T; FEATURE_COUNT]) -> T {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { leaf } => return leaf,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
            }
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[TreeNode<T>], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Structural check for trees read from disk.
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                TreeNode::Leaf { leaf } if !leaf.is_finite() => return Err(format!("node {i}: non-finite leaf")),
                TreeNode::Leaf { .. } => {}
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= FEATURE_COUNT {
                        return Err(format!("node {i}: feature index {feature} out of range"));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("node {i}: non-finite threshold"));
                    }
                    for c in [left, right] {
                        if c <= i || c >= self.nodes.len() {
                            return Err(format!("node {i}: bad child reference {c}"));
                        }
                        parents[c] += 1;
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err("nodes do not form a single tree".into());
        }
        Ok(())
    }
}

/// Exact greedy fit of one tree to per-sample gradient statistics.
pub(crate) struct GradientFit<'a, T> {
    pub xs: &'a [[T; FEATURE_COUNT]],
    pub grad: &'a [T],
    pub hess: &'a [T],
    pub lambda: T,
    pub min_child_weight: T,
    pub min_split_gain: T,
    pub shrinkage: T,
    pub max_depth: usize,
}

struct Split<T> {
    feature: usize,
    threshold: T,
    gain: T,
}

impl<T: Real> GradientFit<'_, T> {
    pub fn fit(&self, rows: Vec<usize>) -> RegressionTree<T> {
        let mut nodes = Vec::new();
        self.grow(rows, 0, &mut nodes);
        RegressionTree { nodes }
    }

    fn score(&self, g: T, h: T) -> T {
        g * g / (h + self.lambda)
    }

    fn grow(&self, rows: Vec<usize>, depth: usize, nodes: &mut Vec<TreeNode<T>>) -> usize {
        let id = nodes.len();
        let (g, h) = rows
            .iter()
            .fold((T::zero(), T::zero()), |(g, h), &r| (g + self.grad[r], h + self.hess[r]));
        let leaf = TreeNode::Leaf {
            leaf: -g / (h + self.lambda) * self.shrinkage,
        };
        nodes.push(leaf);
        if depth >= self.max_depth || rows.len() < 2 {
            return id;
        }
        let Some(split) = self.best_split(&rows, g, h) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.xs[r][split.feature] < split.threshold);
        let left = self.grow(left_rows, depth + 1, nodes);
        let right = self.grow(right_rows, depth + 1, nodes);
        nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, rows: &[usize], g: T, h: T) -> Option<Split<T>> {
        let parent = self.score(g, h);
        let half = T::lit(0.5);
        let mut best: Option<Split<T>> = None;
        let mut order = rows.to_vec();
        for f in 0..FEATURE_COUNT {
            order.sort_by(|&a, &b| self.xs[a][f].partial_cmp(&self.xs[b][f]).unwrap());
            let (mut gl, mut hl) = (T::zero(), T::zero());
            for w in 0..order.len() - 1 {
                let r = order[w];
                gl += self.grad[r];
                hl += self.hess[r];
                let (lo, hi) = (self.xs[r][f], self.xs[order[w + 1]][f]);
                if !(lo < hi) {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < self.min_child_weight || hr < self.min_child_weight {
                    continue;
                }
                let gain = half * (self.score(gl, hl) + self.score(gr, hr) - parent);
                if gain > self.min_split_gain && best.as_ref().map_or(true, |b| gain > b.gain) {
                    let mid = (lo + hi) * half;
                    best = Some(Split {
                        feature: f,
                        threshold: if mid > lo { mid } else { hi },
                        gain,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: f64) -> [f64; FEATURE_COUNT] {
        [1.0, 1.0, 1.0, 1.0, 1.0, v, 1.0, 1.0]
    }

    #[test]
    fn splits_on_the_informative_feature() {
        let xs: Vec<_> = (0..8).map(|i| row(i as f64)).collect();
        let grad: Vec<f64> = (0..8).map(|i| if i < 4 { 1.0 } else { -1.0 }).collect();
        let hess = vec![1.0; 8];
        let fit = GradientFit {
            xs: &xs,
            grad: &grad,
            hess: &hess,
            lambda: 1.0,
            min_child_weight: 1.0,
            min_split_gain: 1e-6,
            shrinkage: 1.0,
            max_depth: 3,
        };
        let tree = fit.fit((0..8).collect());
        assert_eq!(
            tree.nodes[0],
            TreeNode::Split {
                feature: 5,
                threshold: 3.5,
                left: 1,
                right: 2
            }
        );
        // Pure children have nothing left to gain.
        assert_eq!(tree.depth(), 1);
        assert_eq!(tree.eval(&row(0.0)), -4.0 / 5.0);
        assert_eq!(tree.eval(&row(7.0)), 4.0 / 5.0);
        tree.validate().unwrap();
    }

    #[test]
    fn adjacent_floats_use_upper_value() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let xs = vec![row(lo), row(lo), row(hi), row(hi)];
        let fit = GradientFit {
            xs: &xs,
            grad: &[1.0, 1.0, -1.0, -1.0],
            hess: &[1.0; 4],
            lambda: 1.0,
            min_child_weight: 1.0,
            min_split_gain: 1e-6,
            shrinkage: 1.0,
            max_depth: 1,
        };
        let tree = fit.fit((0..4).collect());
        assert!(matches!(tree.nodes[0], TreeNode::Split { threshold, .. } if threshold == hi));
        assert!(tree.eval(&row(lo)) < 0.0 && tree.eval(&row(hi)) > 0.0);
    }

    #[test]
    fn depth_zero_is_a_leaf() {
        let xs = vec![row(0.0), row(1.0)];
        let fit = GradientFit {
            xs: &xs,
            grad: &[1.0, -1.0],
            hess: &[1.0, 1.0],
            lambda: 1.0,
            min_child_weight: 0.0,
            min_split_gain: 0.0,
            shrinkage: 1.0,
            max_depth: 0,
        };
        assert_eq!(fit.fit(vec![0, 1]), RegressionTree::leaf(0.0));
    }

    #[test]
    fn validate_rejects_cycles_and_orphans() {
        let bad = RegressionTree {
            nodes: vec![
                TreeNode::Split {
                    feature: 0,
                    threshold: 1.0,
                    left: 1,
                    right: 1,
                },
                TreeNode::Leaf { leaf: 0.0 },
            ],
        };
        assert!(bad.validate().is_err());
        let orphan = RegressionTree {
            nodes: vec![TreeNode::Leaf { leaf: 0.0 }, TreeNode::Leaf { leaf: 1.0 }],
        };
        assert!(orphan.validate().is_err());
        let wide = RegressionTree {
            nodes: vec![TreeNode::Split {
                feature: 9,
                threshold: 1.0,
                left: 1,
                right: 2,
            }],
        };
        assert!(wide.validate().is_err());
    }
}
