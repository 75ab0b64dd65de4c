//! Fitted model documents.
//!
//! The classifier parameters are stored as shortest round-trip decimals, so a
//! reloaded model scores bit-identically. The weight table the model was
//! shipped with and the split it was trained on travel with it.

use std::path::Path;

use railodm_core::classifier::{GaussianNbModel, WeightTable};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hashing::sha256_hex;
use crate::weights_file::{weights_from_value, weights_to_value};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingInfo {
    pub manifest_hash: String,
    pub route_hash: String,
    pub split_seed: u64,
    pub train_runs: Vec<usize>,
    pub test_runs: Vec<usize>,
    pub train_seeds: Vec<u64>,
    pub test_seeds: Vec<u64>,
    pub train_rows: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: GaussianNbModel,
    pub weights: WeightTable,
    pub training: TrainingInfo,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    model: GaussianNbModel,
    weights: Value,
    training: TrainingInfo,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            model: self.model.clone(),
            weights: weights_to_value(&self.weights),
            training: self.training.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::Schema {
            what: "model",
            problems: vec![e.to_string()],
        })?;
        let weights = weights_from_value(&doc.weights).map_err(|errs| Error::Schema {
            what: "model weights",
            problems: errs.iter().map(|e| e.to_string()).collect(),
        })?;
        let m = &doc.model;
        let mut problems = Vec::new();
        let n = m.features.len();
        if m.scalers.len() != n {
            problems.push(format!("{} scalers for {n} features", m.scalers.len()));
        }
        if m.classes.len() != railodm_core::classifier::NUM_CLASSES {
            problems.push(format!(
                "{} classes, expected {}",
                m.classes.len(),
                railodm_core::classifier::NUM_CLASSES
            ));
        }
        for (i, c) in m.classes.iter().enumerate() {
            if c.mean.len() != n || c.var.len() != n {
                problems.push(format!(
                    "classes[{i}]: parameter length does not match {n} features"
                ));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Schema {
                what: "model",
                problems,
            });
        }
        Ok(Self {
            model: doc.model,
            weights,
            training: doc.training,
        })
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }
}

pub fn save_model(model: &ModelFile, path: &Path) -> Result<()> {
    std::fs::write(path, model.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::from_json(&text)
}
