use nalgebra::{Cholesky, DMatrix, DVector};

use super::{check_penalty, check_reg};
use crate::error::{check_dim, Error, Result};

/// `f(x) = ‖A x − b‖² + (ε/2) ‖x‖²`.
///
/// The squared residual carries no ½ factor, so the gradient is
/// `2 Aᵀ(A x − b) + ε x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRegressionCost {
    features: DMatrix<f64>,
    targets: DVector<f64>,
    reg_weight: f64,
    gram: DMatrix<f64>,
    moment: DVector<f64>,
}

impl LinearRegressionCost {
    pub fn new(features: DMatrix<f64>, targets: DVector<f64>) -> Result<Self> {
        Self::with_regularization(features, targets, 0.0)
    }

    pub fn with_regularization(features: DMatrix<f64>, targets: DVector<f64>, reg_weight: f64) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::invalid(
                "linear regression needs at least one sample and one feature",
            ));
        }
        check_dim(features.nrows(), targets.len())?;
        check_reg(reg_weight)?;
        if features.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("linear regression data must be finite"));
        }
        let gram = features.tr_mul(&features);
        let moment = features.tr_mul(&targets);
        Ok(LinearRegressionCost {
            features,
            targets,
            reg_weight,
            gram,
            moment,
        })
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn reg_weight(&self) -> f64 {
        self.reg_weight
    }

    /// `AᵀA`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `Aᵀb`.
    pub fn moment(&self) -> &DVector<f64> {
        &self.moment
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let r = &self.features * x - &self.targets;
        Ok(r.norm_squared() + 0.5 * self.reg_weight * x.norm_squared())
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok((&self.gram * x - &self.moment) * 2.0 + x * self.reg_weight)
    }

    pub fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut hess = &self.gram * 2.0;
        for d in 0..self.dim() {
            hess[(d, d)] += self.reg_weight;
        }
        Ok(hess)
    }

    /// Solves `(2AᵀA + (r + ε) I) x = r w + 2Aᵀb`.
    pub fn prox(&self, w: &DVector<f64>, penalty: f64) -> Result<DVector<f64>> {
        check_dim(self.dim(), w.len())?;
        check_penalty(penalty)?;
        let mut system = &self.gram * 2.0;
        for d in 0..self.dim() {
            system[(d, d)] += penalty + self.reg_weight;
        }
        let rhs = w * penalty + &self.moment * 2.0;
        let chol = Cholesky::new(system).ok_or(Error::SingularSystem)?;
        Ok(chol.solve(&rhs))
    }
}
