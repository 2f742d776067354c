//! Gradient-trained linear regressors: standard LMS and rectified LMS.
//!
//! Both maximize a Gaussian log-likelihood by full-batch gradient ascent.
//! The rectified variant models a threshold-linear observation y = G(phi.x +
//! noise): positive targets contribute ordinary squared-error terms, zero
//! targets contribute the truncated-Gaussian mass log(1 - erf(phi.x /
//! (sqrt(2) sigma))) / 2. Its gradient term for zero targets carries the
//! hazard ratio from `numerics`, which vanishes once phi.x is pushed well
//! below zero -- learning on inhibitor-alone trials shuts off instead of
//! dragging the weight back up.
//!
//! The update is computed in sigma-cancelled form. At sigma = 1e-4 the raw
//! likelihood gradient is of order 1e8 and the raw learning rate of order
//! 1e-9; the code multiplies them symbolically so neither extreme is ever
//! materialized: the y>0 term becomes residual sums scaled by 1/((n+2) m)
//! and the y=0 term picks up a single factor of sigma.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{hazard_raw, log_erfc_raw, z_score};

const SQRT_2PI: f64 = 2.5066282746310002;
/// sqrt(2/pi)
const SQRT_2_OVER_PI: f64 = 0.7978845608028654;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: weights have {expected} entries, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("record {index} has target {value}, but the rectified model requires targets >= 0")]
    NegativeTarget { index: usize, value: f64 },
    #[error("training set is empty")]
    EmptyData,
    #[error("inputs and targets have different lengths ({inputs} vs {targets})")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("training diverged (non-finite weight) at epoch {epoch}")]
    Diverged { epoch: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Lms,
    RectifiedLms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearWeights {
    pub phi: Vec<f64>,
}

impl LinearWeights {
    pub fn zeros(dim: usize) -> Self {
        LinearWeights {
            phi: vec![0.0; dim],
        }
    }

    fn dot(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.phi.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.phi.len(),
                found: x.len(),
            });
        }
        Ok(self.phi.iter().zip(x).map(|(w, v)| w * v).sum())
    }
}

/// phi.x, the plain LMS mean prediction.
pub fn lms_predict(w: &LinearWeights, x: &[f64]) -> Result<f64, ModelError> {
    w.dot(x)
}

/// max(0, phi.x), the threshold-linear prediction of the rectified model.
pub fn rectified_predict(w: &LinearWeights, x: &[f64]) -> Result<f64, ModelError> {
    Ok(w.dot(x)?.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Observation noise scale sigma.
    pub sigma: f64,
    /// Replaces the default learning rate sigma^2/(n+2) when set.
    pub learning_rate_override: Option<f64>,
    pub max_epochs: usize,
    /// Convergence threshold on the infinity norm of the applied update.
    pub gradient_tolerance: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            sigma: 1e-4,
            learning_rate_override: None,
            max_epochs: 200_000,
            gradient_tolerance: 1e-9,
        }
    }
}

impl TrainingConfig {
    pub fn learning_rate(&self, n_features: usize) -> f64 {
        self.learning_rate_override
            .unwrap_or(self.sigma * self.sigma / (n_features as f64 + 2.0))
    }

    fn validate(&self) -> Result<(), ModelError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if let Some(lr) = self.learning_rate_override {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(ModelError::InvalidConfig(format!(
                    "learning_rate_override must be positive, got {lr}"
                )));
            }
        }
        if self.max_epochs == 0 {
            return Err(ModelError::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(ModelError::InvalidConfig(
                "gradient_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub epochs_run: usize,
    pub final_gradient_inf_norm: f64,
    pub final_log_likelihood: f64,
    pub converged: bool,
}

/// A trained regressor: weights plus the kind that decides whether the
/// prediction is rectified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedLinearModel {
    pub weights: LinearWeights,
    pub kind: ModelKind,
}

impl TrainedLinearModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        match self.kind {
            ModelKind::Lms => lms_predict(&self.weights, x),
            ModelKind::RectifiedLms => rectified_predict(&self.weights, x),
        }
    }
}

fn check_lengths(xs: &[Vec<f64>], ys: &[f64]) -> Result<(), ModelError> {
    if xs.len() != ys.len() {
        return Err(ModelError::LengthMismatch {
            inputs: xs.len(),
            targets: ys.len(),
        });
    }
    Ok(())
}

fn check_nonneg_targets(ys: &[f64]) -> Result<(), ModelError> {
    for (index, &value) in ys.iter().enumerate() {
        if value < 0.0 {
            return Err(ModelError::NegativeTarget { index, value });
        }
    }
    Ok(())
}

/// Gaussian log-likelihood: sum_i [ -log(sqrt(2 pi) sigma) - (y_i - phi.x_i)^2 / (2 sigma^2) ].
pub fn lms_log_likelihood(
    w: &LinearWeights,
    xs: &[Vec<f64>],
    ys: &[f64],
    sigma: f64,
) -> Result<f64, ModelError> {
    check_lengths(xs, ys)?;
    let log_norm = (SQRT_2PI * sigma).ln();
    let mut ll = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let r = y - w.dot(x)?;
        ll += -log_norm - r * r / (2.0 * sigma * sigma);
    }
    Ok(ll)
}

/// Truncated-Gaussian log-likelihood of the rectified model: squared-error
/// terms for y > 0, mass terms -log 2 + log(1 - erf(phi.x / (sqrt(2) sigma)))
/// for y = 0, the latter in log space so deeply truncated records stay finite.
pub fn rectified_log_likelihood(
    w: &LinearWeights,
    xs: &[Vec<f64>],
    ys: &[f64],
    sigma: f64,
) -> Result<f64, ModelError> {
    check_lengths(xs, ys)?;
    check_nonneg_targets(ys)?;
    let log_norm = (SQRT_2PI * sigma).ln();
    let mut ll = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let m = w.dot(x)?;
        if y > 0.0 {
            let r = y - m;
            ll += -log_norm - r * r / (2.0 * sigma * sigma);
        } else {
            ll += -std::f64::consts::LN_2 + log_erfc_raw(z_score(m, sigma));
        }
    }
    Ok(ll)
}

/// Analytic gradient of the Gaussian log-likelihood:
/// (1/sigma^2) sum_i (y_i - phi.x_i) x_i.
pub fn lms_gradient(
    w: &LinearWeights,
    xs: &[Vec<f64>],
    ys: &[f64],
    sigma: f64,
) -> Result<Vec<f64>, ModelError> {
    check_lengths(xs, ys)?;
    let mut g = vec![0.0; w.phi.len()];
    for (x, &y) in xs.iter().zip(ys) {
        let r = y - w.dot(x)?;
        for (gj, &xj) in g.iter_mut().zip(x) {
            *gj += r * xj;
        }
    }
    let inv = 1.0 / (sigma * sigma);
    for gj in &mut g {
        *gj *= inv;
    }
    Ok(g)
}

/// Analytic gradient of the rectified log-likelihood: the y > 0 residual term
/// minus sqrt(2/(pi sigma^2)) times the hazard-weighted sum over y = 0
/// records.
pub fn rectified_gradient(
    w: &LinearWeights,
    xs: &[Vec<f64>],
    ys: &[f64],
    sigma: f64,
) -> Result<Vec<f64>, ModelError> {
    check_lengths(xs, ys)?;
    check_nonneg_targets(ys)?;
    let mut g = vec![0.0; w.phi.len()];
    let inv_var = 1.0 / (sigma * sigma);
    let zero_scale = SQRT_2_OVER_PI / sigma;
    for (x, &y) in xs.iter().zip(ys) {
        let m = w.dot(x)?;
        if y > 0.0 {
            let c = (y - m) * inv_var;
            for (gj, &xj) in g.iter_mut().zip(x) {
                *gj += c * xj;
            }
        } else {
            let c = -zero_scale * hazard_raw(z_score(m, sigma));
            for (gj, &xj) in g.iter_mut().zip(x) {
                *gj += c * xj;
            }
        }
    }
    Ok(g)
}

/// sigma^2-scaled gradient: residual sums for y > 0, sigma * sqrt(2/pi) *
/// hazard for y = 0. Multiplying by the learning rate over sigma^2 recovers
/// the exact update without ever forming the raw gradient.
fn scaled_gradient(kind: ModelKind, phi: &[f64], xs: &[Vec<f64>], ys: &[f64], sigma: f64) -> Vec<f64> {
    let mut g = vec![0.0; phi.len()];
    for (x, &y) in xs.iter().zip(ys) {
        let m: f64 = phi.iter().zip(x).map(|(w, v)| w * v).sum();
        let c = match kind {
            ModelKind::Lms => y - m,
            ModelKind::RectifiedLms => {
                if y > 0.0 {
                    y - m
                } else {
                    -sigma * SQRT_2_OVER_PI * hazard_raw(z_score(m, sigma))
                }
            }
        };
        for (gj, &xj) in g.iter_mut().zip(x) {
            *gj += c * xj;
        }
    }
    g
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

/// Full-batch gradient ascent from phi = 0.
///
/// The per-epoch step is the learning rate times the mean (per-record)
/// likelihood gradient; training stops when the step's infinity norm falls
/// below `gradient_tolerance` or `max_epochs` is reached.
pub fn train(
    kind: ModelKind,
    xs: &[Vec<f64>],
    ys: &[f64],
    config: &TrainingConfig,
) -> Result<(LinearWeights, FitReport), ModelError> {
    train_impl(kind, xs, ys, config, None)
}

pub(crate) fn train_impl(
    kind: ModelKind,
    xs: &[Vec<f64>],
    ys: &[f64],
    config: &TrainingConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(LinearWeights, FitReport), ModelError> {
    config.validate()?;
    check_lengths(xs, ys)?;
    if xs.is_empty() {
        return Err(ModelError::EmptyData);
    }
    if kind == ModelKind::RectifiedLms {
        check_nonneg_targets(ys)?;
    }
    let n = xs[0].len();
    for x in xs {
        if x.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
    }
    let m = xs.len() as f64;
    let sigma = config.sigma;
    // learning_rate / sigma^2, averaged over records; sigma-free by default
    let step_scale = match config.learning_rate_override {
        None => 1.0 / ((n as f64 + 2.0) * m),
        Some(lr) => lr / (sigma * sigma * m),
    };

    let mut phi = vec![0.0; n];
    let mut epochs_run = 0;
    let mut converged = false;
    let mut last_scaled = vec![0.0; n];
    for epoch in 0..config.max_epochs {
        let g = scaled_gradient(kind, &phi, xs, ys, sigma);
        let mut step_norm = 0.0f64;
        for (pj, &gj) in phi.iter_mut().zip(&g) {
            let step = step_scale * gj;
            *pj += step;
            step_norm = step_norm.max(step.abs());
        }
        epochs_run = epoch + 1;
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(ModelError::Diverged { epoch: epochs_run });
        }
        if let Some(tr) = trace.as_deref_mut() {
            let w = LinearWeights { phi: phi.clone() };
            let ll = match kind {
                ModelKind::Lms => lms_log_likelihood(&w, xs, ys, sigma)?,
                ModelKind::RectifiedLms => rectified_log_likelihood(&w, xs, ys, sigma)?,
            };
            tr.push(ll);
        }
        last_scaled = g;
        if step_norm <= config.gradient_tolerance {
            converged = true;
            break;
        }
    }

    let weights = LinearWeights { phi };
    let final_log_likelihood = match kind {
        ModelKind::Lms => lms_log_likelihood(&weights, xs, ys, sigma)?,
        ModelKind::RectifiedLms => rectified_log_likelihood(&weights, xs, ys, sigma)?,
    };
    let report = FitReport {
        epochs_run,
        final_gradient_inf_norm: inf_norm(&last_scaled) / (sigma * sigma),
        final_log_likelihood,
        converged,
    };
    Ok((weights, report))
}
