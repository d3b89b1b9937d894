use crate::Real;

const HESSIAN_FLOOR: f64 = 1e-16;

pub fn softmax<T: Real>(scores: &[T]) -> Vec<T> {
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = scores.iter().map(|&s| (s - max).exp()).collect();
    let total = exps.iter().fold(T::zero(), |acc, &e| acc + e);
    exps.into_iter().map(|e| e / total).collect()
}

/// Negative log-likelihood of `label` under the softmax of `scores`.
pub fn softmax_log_loss<T: Real>(scores: &[T], label: usize) -> T {
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + scores.iter().fold(T::zero(), |acc, &s| acc + (s - max).exp()).ln();
    lse - scores[label]
}

/// Gradient of [`softmax_log_loss`] with respect to each score: `p - y`.
pub fn softmax_gradient<T: Real>(scores: &[T], label: usize) -> Vec<T> {
    let mut g = softmax(scores);
    g[label] -= T::one();
    g
}

/// Per-class second-order weight `2 p (1 - p)`, floored. The factor two
/// keeps steps conservative, since each class gets its own tree and the
/// off-diagonal Hessian terms are ignored.
pub fn softmax_hessian<T: Real>(scores: &[T]) -> Vec<T> {
    softmax(scores)
        .into_iter()
        .map(|p| (T::lit(2.0) * p * (T::one() - p)).max(T::lit(HESSIAN_FLOOR)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_scores() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        assert!((softmax_log_loss(&[1.0, 1.0, 1.0], 2) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(softmax_gradient(&[0.0, 0.0], 1), vec![0.5, -0.5]);
        assert_eq!(softmax_hessian(&[0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn large_scores_stay_finite() {
        let p = softmax(&[1000.0f64, 0.0]);
        assert!(p.iter().all(|x| x.is_finite()));
        assert!(softmax_log_loss(&[1000.0f64, 0.0], 1).is_finite());
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(scores in prop::collection::vec(-20.0f64..20.0, 2..6)) {
            let p = softmax(&scores);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(p.iter().all(|&x| x > 0.0 && x <= 1.0));
        }

        #[test]
        fn gradient_matches_central_differences(
            scores in prop::collection::vec(-5.0f64..5.0, 2..5),
            pick in 0usize..5,
        ) {
            let label = pick % scores.len();
            let g = softmax_gradient(&scores, label);
            let eps = 1e-5;
            for c in 0..scores.len() {
                let (mut up, mut down) = (scores.clone(), scores.clone());
                up[c] += eps;
                down[c] -= eps;
                let fd = (softmax_log_loss(&up, label) - softmax_log_loss(&down, label)) / (2.0 * eps);
                prop_assert!((g[c] - fd).abs() <= 1e-6 * g[c].abs().max(1e-3));
            }
        }

        #[test]
        fn gradients_sum_to_zero(scores in prop::collection::vec(-20.0f64..20.0, 2..6), label in 0usize..2) {
            let g = softmax_gradient(&scores, label);
            prop_assert!(g.iter().sum::<f64>().abs() <= 1e-12);
        }
    }
}
