//! Gradient-boosted trees with a softmax objective, a CART baseline,
//! evaluation metrics and a versioned JSON model format.

mod boost;
mod cart;
mod eval;
mod loss;
mod model_io;
mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use boost::{train_gbdt, train_gbdt_traced, GbdtModel, GbdtParams, LAMBDA, MIN_CHILD_WEIGHT, MIN_SPLIT_GAIN};
pub use cart::{train_decision_tree, CartNode, DecisionTree};
pub use eval::{evaluate, EvalReport};
pub use loss::{softmax, softmax_gradient, softmax_hessian, softmax_log_loss};
pub use model_io::{load_model, model_from_json, model_to_json, save_model, MODEL_VERSION};
pub use tree::{RegressionTree, TreeNode};

pub const FEATURE_COUNT: usize = 8;
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = ["mm", "mc", "wn", "wmn", "wcn", "ds", "ac", "mec"];

/// Workload and cluster description fed to the classifier. Memory is in MB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub mm: f64,
    pub mc: f64,
    pub wn: f64,
    pub wmn: f64,
    pub wcn: f64,
    pub ds: f64,
    /// Application complexity, 1 to 3.
    pub ac: f64,
    /// Total worker memory, `wn * wmn`.
    pub mec: f64,
}

impl FeatureVector {
    pub fn new(mm: f64, mc: f64, wn: f64, wmn: f64, wcn: f64, ds: f64, ac: f64) -> Result<Self> {
        Self::from_array([mm, mc, wn, wmn, wcn, ds, ac, wn * wmn])
    }

    /// Checks every invariant, including `mec == wn * wmn`.
    pub fn from_array(a: [f64; FEATURE_COUNT]) -> Result<Self> {
        for (name, &v) in FEATURE_NAMES.iter().zip(&a) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("feature {name} must be positive, got {v}")));
            }
        }
        let [mm, mc, wn, wmn, wcn, ds, ac, mec] = a;
        if !matches!(ac as u32, 1..=3) || ac.fract() != 0.0 {
            return Err(Error::invalid(format!("application complexity must be 1, 2 or 3, got {ac}")));
        }
        if mec != wn * wmn {
            return Err(Error::invalid(format!("mec = {mec} differs from wn * wmn = {}", wn * wmn)));
        }
        Ok(FeatureVector { mm, mc, wn, wmn, wcn, ds, ac, mec })
    }

    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [self.mm, self.mc, self.wn, self.wmn, self.wcn, self.ds, self.ac, self.mec]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledRecord {
    pub features: FeatureVector,
    pub label: usize,
}

pub trait Classifier {
    fn n_classes(&self) -> usize;
    fn predict_class(&self, x: &FeatureVector) -> usize;
}

#[derive(Serialize, Deserialize)]
struct Row {
    mm: f64,
    mc: f64,
    wn: f64,
    wmn: f64,
    wcn: f64,
    ds: f64,
    ac: f64,
    mec: f64,
    label: usize,
}

/// Writes records as CSV with header `mm,mc,wn,wmn,wcn,ds,ac,mec,label`.
pub fn write_records<W: std::io::Write>(records: &[LabeledRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        let [mm, mc, wn, wmn, wcn, ds, ac, mec] = r.features.to_array();
        w.serialize(Row { mm, mc, wn, wmn, wcn, ds, ac, mec, label: r.label })?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_records<R: std::io::Read>(input: R) -> Result<Vec<LabeledRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let expected: Vec<&str> = FEATURE_NAMES.iter().copied().chain(["label"]).collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Csv(format!("expected header {}", expected.join(","))));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row?;
        let features = FeatureVector::from_array([row.mm, row.mc, row.wn, row.wmn, row.wcn, row.ds, row.ac, row.mec])
            .map_err(|e| Error::Csv(format!("record {}: {e}", i + 1)))?;
        out.push(LabeledRecord { features, label: row.label });
    }
    Ok(out)
}

/// Shuffles with `seed` and cuts after `round(train_fraction * len)` records.
pub fn split_train_test(data: &[LabeledRecord], train_fraction: f64, seed: u64) -> Result<(Vec<LabeledRecord>, Vec<LabeledRecord>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    let mut rows = boost::shuffled(data, seed);
    let cut = (train_fraction * rows.len() as f64).round() as usize;
    let test = rows.split_off(cut);
    Ok((rows, test))
}

pub fn save_records(records: &[LabeledRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(records, std::io::BufWriter::new(file))
}

pub fn load_records(path: &Path) -> Result<Vec<LabeledRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mec_is_derived() {
        let x = FeatureVector::new(8192.0, 4.0, 4.0, 8192.0, 4.0, 100.0, 2.0).unwrap();
        assert_eq!(x.mec, 32768.0);
        assert_eq!(FeatureVector::from_array(x.to_array()).unwrap(), x);
    }

    #[test]
    fn invalid_features() {
        assert!(FeatureVector::new(0.0, 4.0, 4.0, 8192.0, 4.0, 100.0, 2.0).is_err());
        assert!(FeatureVector::new(1.0, 4.0, 4.0, 8192.0, 4.0, 100.0, 4.0).is_err());
        assert!(FeatureVector::new(1.0, 4.0, 4.0, 8192.0, 4.0, 100.0, 1.5).is_err());
        assert!(FeatureVector::new(1.0, 4.0, 4.0, 8192.0, 4.0, f64::NAN, 1.0).is_err());
        assert!(FeatureVector::from_array([1.0, 1.0, 2.0, 3.0, 1.0, 1.0, 1.0, 5.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![
            LabeledRecord {
                features: FeatureVector::new(2048.0, 2.0, 2.0, 4096.0, 4.0, 12.345678901234567, 3.0).unwrap(),
                label: 1,
            },
            LabeledRecord {
                features: FeatureVector::new(4096.0, 1.0, 8.0, 2048.0, 1.0, 1.0, 1.0).unwrap(),
                label: 0,
            },
        ];
        let mut buf = Vec::new();
        write_records(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("mm,mc,wn,wmn,wcn,ds,ac,mec,label\n"));
        assert_eq!(read_records(&buf[..]).unwrap(), recs);
    }

    #[test]
    fn split_sizes() {
        let recs: Vec<_> = (0..10)
            .map(|i| LabeledRecord {
                features: FeatureVector::new(1.0, 1.0, 1.0, 1.0, 1.0, (i + 1) as f64, 1.0).unwrap(),
                label: i % 2,
            })
            .collect();
        let (train, test) = split_train_test(&recs, 0.7, 3).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        assert_eq!(split_train_test(&recs, 0.7, 3).unwrap(), (train, test));
        assert!(split_train_test(&recs, 1.0, 3).is_err());
    }

    #[test]
    fn csv_rejects_bad_header_and_values() {
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
        let bad = "mm,mc,wn,wmn,wcn,ds,ac,mec,label\n1,1,2,3,1,1,1,7,0\n";
        assert!(matches!(read_records(bad.as_bytes()), Err(Error::Csv(_))));
    }
}
