use std::path::Path;

use serde::{Deserialize, Serialize};

use super::boost::GbdtModel;
use super::tree::{RegressionTree, TreeNode};
use crate::{Error, Real, Result};

pub const MODEL_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDoc<T> {
    version: u64,
    n_classes: usize,
    learning_rate: T,
    base_score: T,
    n_estimators: usize,
    max_depth: usize,
    trees: Vec<TreeDoc<T>>,
}

#[derive(Serialize, Deserialize)]
struct TreeDoc<T> {
    nodes: Vec<TreeNode<T>>,
}

#[derive(Deserialize)]
struct Header {
    version: u64,
}

/// Serializes with shortest round-trip float formatting, so equal models
/// give identical bytes and parsing restores every value exactly.
pub fn model_to_json<T: Real>(model: &GbdtModel<T>) -> String {
    let doc = ModelDoc {
        version: MODEL_VERSION,
        n_classes: model.n_classes,
        learning_rate: model.learning_rate,
        base_score: model.base_score,
        n_estimators: model.n_estimators,
        max_depth: model.max_depth,
        trees: model
            .trees
            .iter()
            .map(|t| TreeDoc { nodes: t.nodes.clone() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("model serialization cannot fail");
    s.push('\n');
    s
}

pub fn model_from_json<T: Real>(text: &str) -> Result<GbdtModel<T>> {
    let header: Header = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if header.version != MODEL_VERSION {
        return Err(Error::UnsupportedModelVersion(header.version));
    }
    let doc: ModelDoc<T> = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let model = GbdtModel {
        n_classes: doc.n_classes,
        learning_rate: doc.learning_rate,
        base_score: doc.base_score,
        n_estimators: doc.n_estimators,
        max_depth: doc.max_depth,
        trees: doc
            .trees
            .into_iter()
            .map(|t| RegressionTree { nodes: t.nodes })
            .collect(),
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model<T: Real>(model: &GbdtModel<T>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Real>(path: &Path) -> Result<GbdtModel<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
