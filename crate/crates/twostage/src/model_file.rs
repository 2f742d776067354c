//! On-disk model format: JSON with a `"model"` tag selecting the variant.
//!
//! - `lms` / `rlms`: `weights.phi` plus the training config that produced
//!   them.
//! - `svr`: support vectors, dual coefficients, bias, and kernel params.
//! - `two-stage`: one channel per reinforcer (predictor weights, value
//!   weight, satiety).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linear::{lms_predict, rectified_predict, LinearWeights, TrainingConfig};
use crate::svr::{svr_predict, SvrModel};
use crate::two_stage::TwoStageModel;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed model file {path}: {source}")]
    Malformed {
        path: String,
        source: serde_json::Error,
    },
    #[error("prediction failed: {0}")]
    Prediction(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum ModelFile {
    #[serde(rename = "lms")]
    Lms {
        weights: LinearWeights,
        config: TrainingConfig,
    },
    #[serde(rename = "rlms")]
    RectifiedLms {
        weights: LinearWeights,
        config: TrainingConfig,
    },
    #[serde(rename = "svr")]
    Svr(SvrModel),
    #[serde(rename = "two-stage")]
    TwoStage(TwoStageModel),
}

impl ModelFile {
    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelFileError> {
        let wrap = |e: Box<dyn std::fmt::Display>| ModelFileError::Prediction(e.to_string());
        match self {
            ModelFile::Lms { weights, .. } => {
                lms_predict(weights, x).map_err(|e| wrap(Box::new(e)))
            }
            ModelFile::RectifiedLms { weights, .. } => {
                rectified_predict(weights, x).map_err(|e| wrap(Box::new(e)))
            }
            ModelFile::Svr(model) => svr_predict(model, x).map_err(|e| wrap(Box::new(e))),
            ModelFile::TwoStage(model) => {
                model.predict_value(x).map_err(|e| wrap(Box::new(e)))
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelFileError> {
        let mut text = serde_json::to_string_pretty(self).expect("model serializes");
        text.push('\n');
        fs::write(path, text).map_err(|source| ModelFileError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        let text = fs::read_to_string(path).map_err(|source| ModelFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ModelFileError::Malformed {
            path: path.display().to_string(),
            source,
        })
    }
}
