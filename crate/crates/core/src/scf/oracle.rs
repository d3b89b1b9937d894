use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gbdt::{FeatureVector, LabeledRecord};
use crate::{Error, Result};

/// Ground-truth labelling of the synthetic corpus: two executors per node
/// (class 1) pay off once the node has at least two cores and the weighted
/// data size exceeds a quarter of the node's memory; otherwise one executor
/// per node (class 0).
pub fn label_oracle(f: &FeatureVector) -> usize {
    usize::from(f.wcn >= 2.0 && f.ds * f.ac > 0.25 * f.wmn)
}

const NODE_COUNTS: [f64; 3] = [2.0, 4.0, 8.0];
const CORE_COUNTS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
/// 2 GB to 32 GB in powers of two.
const MEMORY_SIZES: [f64; 5] = [2048.0, 4096.0, 8192.0, 16384.0, 32768.0];
const MAX_DATA_MB: f64 = 65536.0;

fn sample(rng: &mut ChaCha8Rng) -> FeatureVector {
    let pick = |rng: &mut ChaCha8Rng, xs: &[f64]| *xs.choose(rng).unwrap();
    let mm = pick(rng, &MEMORY_SIZES);
    let mc = pick(rng, &CORE_COUNTS);
    let wn = pick(rng, &NODE_COUNTS);
    let wmn = pick(rng, &MEMORY_SIZES);
    let wcn = pick(rng, &CORE_COUNTS);
    let ds = (rng.gen::<f64>() * MAX_DATA_MB.ln()).exp();
    let ac = rng.gen_range(1..=3) as f64;
    FeatureVector::new(mm, mc, wn, wmn, wcn, ds, ac).expect("sampled features lie in the envelope")
}

/// `n` oracle-labelled records drawn from the cluster envelope, with data
/// sizes log-uniform in [1, 65536] MB. Redraws the whole batch in the
/// unlikely case that only one class came up.
pub fn generate_training_dataset(n: usize, seed: u64) -> Result<Vec<LabeledRecord>> {
    if n < 100 {
        return Err(Error::invalid(format!("need at least 100 records, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let records: Vec<LabeledRecord> = (0..n)
            .map(|_| {
                let features = sample(&mut rng);
                LabeledRecord {
                    features,
                    label: label_oracle(&features),
                }
            })
            .collect();
        if records.iter().any(|r| r.label != records[0].label) {
            return Ok(records);
        }
    }
}
