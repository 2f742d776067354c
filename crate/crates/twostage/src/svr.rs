//! Epsilon-SVR trained by sequential minimal optimization.
//!
//! The dual is solved in the doubled variable space (alpha, alpha*) with
//! maximal-violating-pair working-set selection, no shrinking, and a full
//! kernel cache -- the training sets here have at most a few dozen rows.
//! Selection scans indices in order, so fitting is deterministic for a fixed
//! record order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvrError {
    #[error("training set is empty")]
    EmptyData,
    #[error("invalid params: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: model expects {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("inputs and targets have different lengths ({inputs} vs {targets})")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error(
        "solver did not reach KKT tolerance in {iterations} iterations (residual violation {violation:.3e})"
    )]
    ConvergenceFailure { iterations: usize, violation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub cost: f64,
    pub epsilon_tube: f64,
    pub kernel: Kernel,
    pub solver_tolerance: f64,
    pub max_iterations: usize,
}

impl SvrParams {
    /// The configuration used for the simulation tables: C = 10,
    /// epsilon = 1e-5, RBF with gamma = 1 / feature count.
    pub fn for_features(n_features: usize) -> Self {
        SvrParams {
            cost: 10.0,
            epsilon_tube: 1e-5,
            kernel: Kernel::Rbf {
                gamma: 1.0 / n_features as f64,
            },
            solver_tolerance: 1e-3,
            max_iterations: 100_000,
        }
    }

    fn validate(&self) -> Result<(), SvrError> {
        if !(self.cost > 0.0) {
            return Err(SvrError::InvalidParams(format!(
                "cost must be positive, got {}",
                self.cost
            )));
        }
        if !(self.epsilon_tube >= 0.0) {
            return Err(SvrError::InvalidParams(format!(
                "epsilon_tube must be nonnegative, got {}",
                self.epsilon_tube
            )));
        }
        if let Kernel::Rbf { gamma } = self.kernel {
            if !(gamma > 0.0) {
                return Err(SvrError::InvalidParams(format!(
                    "gamma must be positive, got {gamma}"
                )));
            }
        }
        if !(self.solver_tolerance > 0.0) {
            return Err(SvrError::InvalidParams(
                "solver_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// alpha_i - alpha_i* for each support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub params: SvrParams,
}

impl SvrModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64, SvrError> {
        svr_predict(self, x)
    }
}

pub fn svr_predict(model: &SvrModel, x: &[f64]) -> Result<f64, SvrError> {
    if let Some(sv) = model.support_vectors.first() {
        if sv.len() != x.len() {
            return Err(SvrError::DimensionMismatch {
                expected: sv.len(),
                found: x.len(),
            });
        }
    }
    let sum: f64 = model
        .support_vectors
        .iter()
        .zip(&model.dual_coefficients)
        .map(|(sv, c)| c * model.params.kernel.eval(sv, x))
        .sum();
    Ok(sum + model.bias)
}

/// Solver state for the doubled dual: index t < m is alpha_t with sign +1,
/// index t >= m is alpha*_{t-m} with sign -1. The constraint
/// sum_t sign_t lambda_t = 0 is preserved exactly by every pair update.
struct Solver<'a> {
    m: usize,
    cost: f64,
    kernel_cache: Vec<f64>, // m x m
    lambda: Vec<f64>,       // 2m
    gradient: Vec<f64>,     // 2m
    ys: &'a [f64],
}

impl<'a> Solver<'a> {
    fn sign(&self, t: usize) -> f64 {
        if t < self.m {
            1.0
        } else {
            -1.0
        }
    }

    fn kernel(&self, t: usize, u: usize) -> f64 {
        self.kernel_cache[(t % self.m) * self.m + (u % self.m)]
    }

    fn in_up(&self, t: usize) -> bool {
        if t < self.m {
            self.lambda[t] < self.cost
        } else {
            self.lambda[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if t < self.m {
            self.lambda[t] > 0.0
        } else {
            self.lambda[t] < self.cost
        }
    }

    /// Maximal violating pair: (i, j, violation).
    fn select_pair(&self) -> (Option<usize>, Option<usize>, f64) {
        let mut i = None;
        let mut j = None;
        let mut up_best = f64::NEG_INFINITY;
        let mut low_best = f64::INFINITY;
        for t in 0..2 * self.m {
            let v = -self.sign(t) * self.gradient[t];
            if self.in_up(t) && v > up_best {
                up_best = v;
                i = Some(t);
            }
            if self.in_low(t) && v < low_best {
                low_best = v;
                j = Some(t);
            }
        }
        (i, j, up_best - low_best)
    }

    fn step(&mut self, i: usize, j: usize) {
        let si = self.sign(i);
        let sj = self.sign(j);
        let eta = self.kernel(i, i) + self.kernel(j, j) - 2.0 * self.kernel(i, j);
        let eta = eta.max(1e-12);
        // move lambda_i by +si*t and lambda_j by -sj*t along the constraint
        let mut t = -(si * self.gradient[i] - sj * self.gradient[j]) / eta;
        let bound_i = if si > 0.0 {
            self.cost - self.lambda[i]
        } else {
            self.lambda[i]
        };
        let bound_j = if sj > 0.0 {
            self.lambda[j]
        } else {
            self.cost - self.lambda[j]
        };
        t = t.min(bound_i).min(bound_j);
        let di = si * t;
        let dj = -sj * t;
        self.lambda[i] += di;
        self.lambda[j] += dj;
        for u in 0..2 * self.m {
            let su = self.sign(u);
            let qui = su * si * self.kernel(u, i);
            let quj = su * sj * self.kernel(u, j);
            self.gradient[u] += qui * di + quj * dj;
        }
    }

    /// Bias from the KKT conditions of free points, interval midpoint when
    /// every point sits on a bound.
    fn bias(&self) -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for t in 0..2 * self.m {
            if self.lambda[t] > 0.0 && self.lambda[t] < self.cost {
                acc += -self.sign(t) * self.gradient[t];
                count += 1;
            }
        }
        if count > 0 {
            return acc / count as f64;
        }
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for t in 0..2 * self.m {
            let v = -self.sign(t) * self.gradient[t];
            if self.in_up(t) {
                up = up.max(v);
            }
            if self.in_low(t) {
                low = low.min(v);
            }
        }
        0.5 * (up + low)
    }

    /// Primal-form dual objective value 1/2 lambda'Q lambda + p'lambda.
    fn objective(&self, epsilon: f64) -> f64 {
        let mut obj = 0.0;
        for t in 0..2 * self.m {
            let p = if t < self.m {
                epsilon - self.ys[t]
            } else {
                epsilon + self.ys[t - self.m]
            };
            // gradient = Q lambda + p, so lambda'(gradient + p) / 2 gives the objective
            obj += 0.5 * self.lambda[t] * (self.gradient[t] + p);
        }
        obj
    }
}

pub fn svr_fit(xs: &[Vec<f64>], ys: &[f64], params: &SvrParams) -> Result<SvrModel, SvrError> {
    Ok(svr_fit_with_objective(xs, ys, params)?.0)
}

/// Fits and also reports the final dual objective
/// (1/2 lambda'Q lambda + p'lambda), for solver validation.
pub fn svr_fit_with_objective(
    xs: &[Vec<f64>],
    ys: &[f64],
    params: &SvrParams,
) -> Result<(SvrModel, f64), SvrError> {
    params.validate()?;
    if xs.is_empty() {
        return Err(SvrError::EmptyData);
    }
    if xs.len() != ys.len() {
        return Err(SvrError::LengthMismatch {
            inputs: xs.len(),
            targets: ys.len(),
        });
    }
    let m = xs.len();
    let mut kernel_cache = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            kernel_cache[a * m + b] = params.kernel.eval(&xs[a], &xs[b]);
        }
    }
    let mut gradient = Vec::with_capacity(2 * m);
    for i in 0..m {
        gradient.push(params.epsilon_tube - ys[i]);
    }
    for i in 0..m {
        gradient.push(params.epsilon_tube + ys[i]);
    }
    let mut solver = Solver {
        m,
        cost: params.cost,
        kernel_cache,
        lambda: vec![0.0; 2 * m],
        gradient,
        ys,
    };

    let mut violation = f64::INFINITY;
    let mut converged = false;
    for _ in 0..params.max_iterations {
        let (i, j, gap) = solver.select_pair();
        violation = gap;
        let (Some(i), Some(j)) = (i, j) else {
            converged = true;
            break;
        };
        if gap <= params.solver_tolerance {
            converged = true;
            break;
        }
        solver.step(i, j);
    }
    if !converged {
        return Err(SvrError::ConvergenceFailure {
            iterations: params.max_iterations,
            violation,
        });
    }

    let bias = solver.bias();
    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for i in 0..m {
        let beta = solver.lambda[i] - solver.lambda[i + m];
        if beta != 0.0 {
            support_vectors.push(xs[i].clone());
            dual_coefficients.push(beta);
        }
    }
    let objective = solver.objective(params.epsilon_tube);
    Ok((
        SvrModel {
            support_vectors,
            dual_coefficients,
            bias,
            params: params.clone(),
        },
        objective,
    ))
}

/// KKT-level feasibility of a fitted model against its training set:
/// returns (max box violation, equality-constraint residual, max
/// complementarity violation for strictly-inside-tube points).
pub fn dual_feasibility(model: &SvrModel, xs: &[Vec<f64>], ys: &[f64]) -> (f64, f64, f64) {
    let c = model.params.cost;
    let mut box_violation = 0.0f64;
    let mut coef_sum = 0.0;
    for &b in &model.dual_coefficients {
        box_violation = box_violation.max((b.abs() - c).max(0.0));
        coef_sum += b;
    }
    let mut complementarity = 0.0f64;
    for (x, &y) in xs.iter().zip(ys) {
        let pred = svr_predict(model, x).expect("training dimension");
        let slack = model.params.epsilon_tube - (y - pred).abs();
        if slack > model.params.solver_tolerance {
            // strictly inside the tube: coefficient must be zero
            let beta = model
                .support_vectors
                .iter()
                .zip(&model.dual_coefficients)
                .find(|(sv, _)| sv.as_slice() == x.as_slice())
                .map(|(_, c)| *c)
                .unwrap_or(0.0);
            complementarity = complementarity.max(beta.abs());
        }
    }
    (box_violation, coef_sum.abs(), complementarity)
}
