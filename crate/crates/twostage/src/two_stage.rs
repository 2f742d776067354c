//! The two-stage architecture: one rectified predictor per primary
//! reinforcer, and a readout that sums their agent-defined values.
//!
//! Each channel learns the salience of a single reinforcer from its own
//! outcome column; there is no shared scalar error signal. The readout
//! multiplies each channel's (nonnegative) prediction by a signed value
//! weight and a satiety coefficient in [0, 1]. Satiety revalues a
//! reinforcer at readout time only -- the learned prediction is untouched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::linear::{train, ModelError, ModelKind, TrainedLinearModel, TrainingConfig};

#[derive(Debug, Error)]
pub enum TwoStageError {
    #[error("channel {reinforcer_id}: {source}")]
    ChannelTraining {
        reinforcer_id: String,
        source: ModelError,
    },
    #[error("channel prediction failed for {reinforcer_id}: {source}")]
    ChannelPrediction {
        reinforcer_id: String,
        source: ModelError,
    },
    #[error("no channel with reinforcer id {0:?}")]
    UnknownReinforcer(String),
    #[error("duplicate reinforcer id {0:?}")]
    DuplicateReinforcer(String),
    #[error("satiety must lie in [0, 1], got {0}")]
    SatietyOutOfRange(f64),
    #[error("dataset has no outcome column for reinforcer {0:?}")]
    MissingOutcomeColumn(String),
}

/// Contract for the first-stage predictors: a regressor whose output is a
/// salience and therefore nonnegative when rectification is on.
pub trait SaliencePredictor {
    fn predict_salience(&self, x: &[f64]) -> Result<f64, ModelError>;
}

impl SaliencePredictor for TrainedLinearModel {
    fn predict_salience(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.predict(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReinforcerChannel<P = TrainedLinearModel> {
    pub reinforcer_id: String,
    pub predictor: P,
    /// Agent-defined value of this reinforcer (+1 reward, -1 punishment).
    pub value_weight: f64,
    /// Readout coefficient in [0, 1]; 1 = fully deprived, 0 = fully sated.
    pub satiety: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageModel<P = TrainedLinearModel> {
    pub channels: Vec<ReinforcerChannel<P>>,
}

impl<P: SaliencePredictor> TwoStageModel<P> {
    pub fn new(channels: Vec<ReinforcerChannel<P>>) -> Result<Self, TwoStageError> {
        for (i, c) in channels.iter().enumerate() {
            if channels[..i].iter().any(|o| o.reinforcer_id == c.reinforcer_id) {
                return Err(TwoStageError::DuplicateReinforcer(c.reinforcer_id.clone()));
            }
            if !(0.0..=1.0).contains(&c.satiety) {
                return Err(TwoStageError::SatietyOutOfRange(c.satiety));
            }
        }
        Ok(TwoStageModel { channels })
    }

    /// Per-reinforcer salience predictions.
    pub fn predict_reinforcers(&self, x: &[f64]) -> Result<BTreeMap<String, f64>, TwoStageError> {
        self.channels
            .iter()
            .map(|c| {
                c.predictor
                    .predict_salience(x)
                    .map(|p| (c.reinforcer_id.clone(), p))
                    .map_err(|source| TwoStageError::ChannelPrediction {
                        reinforcer_id: c.reinforcer_id.clone(),
                        source,
                    })
            })
            .collect()
    }

    /// Value readout: sum of value_weight * satiety * salience over channels.
    pub fn predict_value(&self, x: &[f64]) -> Result<f64, TwoStageError> {
        let mut value = 0.0;
        for c in &self.channels {
            let p = c.predictor.predict_salience(x).map_err(|source| {
                TwoStageError::ChannelPrediction {
                    reinforcer_id: c.reinforcer_id.clone(),
                    source,
                }
            })?;
            value += c.value_weight * c.satiety * p;
        }
        Ok(value)
    }

    pub fn set_satiety(&mut self, reinforcer_id: &str, satiety: f64) -> Result<(), TwoStageError> {
        if !(0.0..=1.0).contains(&satiety) {
            return Err(TwoStageError::SatietyOutOfRange(satiety));
        }
        let channel = self
            .channels
            .iter_mut()
            .find(|c| c.reinforcer_id == reinforcer_id)
            .ok_or_else(|| TwoStageError::UnknownReinforcer(reinforcer_id.to_string()))?;
        channel.satiety = satiety;
        Ok(())
    }
}

/// Trains one predictor per reinforcer on that reinforcer's outcome column.
///
/// `rectified` selects the rectified model (the architecture as proposed);
/// with `false` each channel is a plain LMS regressor and the readout loses
/// the truncation -- the ablation that collapses back to the direct VFA.
pub fn train_two_stage(
    data: &Dataset,
    config: &TrainingConfig,
    rectified: bool,
) -> Result<TwoStageModel, TwoStageError> {
    let kind = if rectified {
        ModelKind::RectifiedLms
    } else {
        ModelKind::Lms
    };
    let xs = data.inputs();
    let mut channels = Vec::with_capacity(data.reinforcer_ids.len());
    for (id, &value_weight) in data.reinforcer_ids.iter().zip(&data.reinforcer_weights) {
        let ys = data
            .reinforcer_targets(id)
            .ok_or_else(|| TwoStageError::MissingOutcomeColumn(id.clone()))?;
        let (weights, _report) =
            train(kind, &xs, &ys, config).map_err(|source| TwoStageError::ChannelTraining {
                reinforcer_id: id.clone(),
                source,
            })?;
        channels.push(ReinforcerChannel {
            reinforcer_id: id.clone(),
            predictor: TrainedLinearModel { weights, kind },
            value_weight,
            satiety: 1.0,
        });
    }
    TwoStageModel::new(channels)
}
