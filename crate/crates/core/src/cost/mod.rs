//! Local cost families, their proximal operators and the centralized oracle.
//!
//! Proximal operators here are parameterized by the *penalty* `r > 0`:
//! `prox(w) = argmin_x f(x) + (r / 2) ‖x − w‖²`. The engine calls them with
//! `r = ρ η_i`.

mod data;
mod linear;
mod logistic;
mod oracle;
mod stream;

use nalgebra::{DMatrix, DVector};

pub use data::{load_dataset_csv, CostFamily, DatasetGenerator, PiecewiseStreamBuilder};
pub use linear::LinearRegressionCost;
pub use logistic::LogisticRegressionCost;
pub use oracle::centralized_minimizer;
pub use stream::{CostSegment, CostStream};

use crate::error::{Error, Result};

/// Termination rule for iterative proximal solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxConfig {
    /// Stop once consecutive inner iterates are closer than this.
    pub threshold: f64,
    pub max_inner_iterations: usize,
}

impl ProxConfig {
    pub const DEFAULT_MAX_INNER: usize = 10_000;

    pub fn new(threshold: f64) -> Self {
        ProxConfig {
            threshold,
            max_inner_iterations: Self::DEFAULT_MAX_INNER,
        }
    }

    /// Tolerance used wherever the operator must be effectively exact.
    pub fn exact() -> Self {
        ProxConfig {
            threshold: 1e-14,
            max_inner_iterations: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::invalid(format!(
                "prox threshold must be positive, got {}",
                self.threshold
            )));
        }
        if self.max_inner_iterations == 0 {
            return Err(Error::invalid("max_inner_iterations must be at least 1"));
        }
        Ok(())
    }
}

impl Default for ProxConfig {
    fn default() -> Self {
        ProxConfig::new(1e-8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxOutcome {
    pub x: DVector<f64>,
    /// Inner iterations performed; zero for closed-form operators.
    pub iterations: usize,
    /// False when the iteration cap was hit before the threshold was met.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalCost {
    Linear(LinearRegressionCost),
    Logistic(LogisticRegressionCost),
}

impl LocalCost {
    pub fn dim(&self) -> usize {
        match self {
            LocalCost::Linear(c) => c.dim(),
            LocalCost::Logistic(c) => c.dim(),
        }
    }

    pub fn reg_weight(&self) -> f64 {
        match self {
            LocalCost::Linear(c) => c.reg_weight(),
            LocalCost::Logistic(c) => c.reg_weight(),
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        match self {
            LocalCost::Linear(c) => c.eval(x),
            LocalCost::Logistic(c) => c.eval(x),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            LocalCost::Linear(c) => c.gradient(x),
            LocalCost::Logistic(c) => c.gradient(x),
        }
    }

    pub fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        match self {
            LocalCost::Linear(c) => c.hessian(x),
            LocalCost::Logistic(c) => c.hessian(x),
        }
    }

    pub fn prox(&self, w: &DVector<f64>, penalty: f64, cfg: &ProxConfig) -> Result<ProxOutcome> {
        match self {
            LocalCost::Linear(c) => Ok(ProxOutcome {
                x: c.prox(w, penalty)?,
                iterations: 0,
                converged: true,
            }),
            LocalCost::Logistic(c) => c.prox(w, penalty, cfg),
        }
    }
}

impl From<LinearRegressionCost> for LocalCost {
    fn from(c: LinearRegressionCost) -> Self {
        LocalCost::Linear(c)
    }
}

impl From<LogisticRegressionCost> for LocalCost {
    fn from(c: LogisticRegressionCost) -> Self {
        LocalCost::Logistic(c)
    }
}

pub(crate) fn check_penalty(penalty: f64) -> Result<()> {
    if penalty > 0.0 && penalty.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("prox penalty must be positive, got {penalty}")))
    }
}

pub(crate) fn check_reg(reg_weight: f64) -> Result<()> {
    if reg_weight >= 0.0 && reg_weight.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "regularization weight must be non-negative, got {reg_weight}"
        )))
    }
}
