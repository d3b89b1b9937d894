use super::{Classifier, LabeledRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Macro averages over the classes that occur in the labels or the
    /// predictions. A class with no predicted (or no true) members scores
    /// zero precision (or recall).
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Left at zero by [`evaluate`]; filled in by whoever timed training.
    pub training_time_s: f64,
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, test: &[LabeledRecord]) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::invalid("test set is empty"));
    }
    let k = model.n_classes();
    let mut confusion = vec![vec![0u64; k]; k];
    for r in test {
        if r.label >= k {
            return Err(Error::invalid(format!("label {} not below n_classes {k}", r.label)));
        }
        confusion[r.label][model.predict_class(&r.features)] += 1;
    }

    let total = test.len() as f64;
    let correct: u64 = (0..k).map(|c| confusion[c][c]).sum();
    let (mut p_sum, mut r_sum, mut f_sum, mut present) = (0.0, 0.0, 0.0, 0usize);
    for c in 0..k {
        let tp = confusion[c][c] as f64;
        let actual: u64 = confusion[c].iter().sum();
        let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
        if actual == 0 && predicted == 0 {
            continue;
        }
        present += 1;
        let p = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let r = if actual > 0 { tp / actual as f64 } else { 0.0 };
        p_sum += p;
        r_sum += r;
        f_sum += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    }
    let n = present as f64;
    Ok(EvalReport {
        accuracy: correct as f64 / total,
        precision: p_sum / n,
        recall: r_sum / n,
        f1: f_sum / n,
        training_time_s: 0.0,
        confusion,
    })
}
