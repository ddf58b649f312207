use nalgebra::{DMatrix, DVector};

use super::{check_penalty, check_reg, ProxConfig, ProxOutcome};
use crate::error::{check_dim, Error, Result};

/// `f(x) = Σ_h log(1 + exp(−b_h a_hᵀ x)) + (ε/2) ‖x‖²` with labels in `{−1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegressionCost {
    features: DMatrix<f64>,
    labels: DVector<f64>,
    reg_weight: f64,
    /// `(1/4) Σ_h ‖a_h‖²`, a smoothness bound for the data term.
    curvature_bound: f64,
    /// `Σ_h |b_h a_h|` componentwise.
    abs_moment: DVector<f64>,
}

/// `log(1 + exp(-t))` without overflow.
fn softplus_neg(t: f64) -> f64 {
    (-t).max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(t))`, the derivative of `softplus_neg` up to sign.
fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

impl LogisticRegressionCost {
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>, reg_weight: f64) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::invalid(
                "logistic regression needs at least one sample and one feature",
            ));
        }
        check_dim(features.nrows(), labels.len())?;
        check_reg(reg_weight)?;
        if labels.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::invalid("logistic labels must be -1 or +1"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("logistic features must be finite"));
        }
        let curvature_bound = 0.25 * features.norm_squared();
        let abs_moment = DVector::from_fn(features.ncols(), |d, _| features.column(d).abs().sum());
        Ok(LogisticRegressionCost {
            features,
            labels,
            reg_weight,
            curvature_bound,
            abs_moment,
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

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    pub fn reg_weight(&self) -> f64 {
        self.reg_weight
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let margins = &self.features * x;
        let loss: f64 = margins
            .iter()
            .zip(self.labels.iter())
            .map(|(&m, &b)| softplus_neg(b * m))
            .sum();
        Ok(loss + 0.5 * self.reg_weight * x.norm_squared())
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut margins = DVector::zeros(self.num_samples());
        let mut grad = DVector::zeros(self.dim());
        self.data_gradient_into(x, &mut margins, &mut grad);
        grad.axpy(self.reg_weight, x, 1.0);
        Ok(grad)
    }

    /// Hessian of the data term plus `ε I`.
    pub fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), x.len())?;
        let margins = &self.features * x;
        let weights = DVector::from_fn(self.num_samples(), |h, _| {
            let s = sigmoid_neg(self.labels[h] * margins[h]);
            s * (1.0 - s)
        });
        let mut scaled = self.features.clone();
        for (h, mut row) in scaled.row_iter_mut().enumerate() {
            row *= weights[h];
        }
        let mut hess = self.features.tr_mul(&scaled);
        for d in 0..self.dim() {
            hess[(d, d)] += self.reg_weight;
        }
        Ok(hess)
    }

    /// Writes `Σ_h −b_h σ(−b_h a_hᵀx) a_h` into `grad`, using `margins` as scratch.
    fn data_gradient_into(&self, x: &DVector<f64>, margins: &mut DVector<f64>, grad: &mut DVector<f64>) {
        margins.gemv(1.0, &self.features, x, 0.0);
        for (m, &b) in margins.iter_mut().zip(self.labels.iter()) {
            *m = -b * sigmoid_neg(b * *m);
        }
        grad.gemv_tr(1.0, &self.features, margins, 0.0);
    }

    /// Componentwise half-width of the interval that must contain the prox
    /// output around its (scaled) argument: `Σ_h |b_h a_h| / (r + ε)`.
    pub fn prox_bracket_half_width(&self, penalty: f64) -> DVector<f64> {
        &self.abs_moment / (penalty + self.reg_weight)
    }

    /// Inexact prox via Nesterov-accelerated gradient descent.
    ///
    /// The regularizer is folded in first: the prox of `f + (ε/2)‖·‖²` at
    /// penalty `r` equals the prox of the data term at penalty `r + ε`,
    /// evaluated at `r / (r + ε) · w`. The solver starts from that point,
    /// uses step `1/L` with `L = r + ε + (1/4) Σ‖a_h‖²` and the constant
    /// strongly-convex momentum, and stops once consecutive iterates are
    /// closer than `cfg.threshold`.
    pub fn prox(&self, w: &DVector<f64>, penalty: f64, cfg: &ProxConfig) -> Result<ProxOutcome> {
        check_dim(self.dim(), w.len())?;
        check_penalty(penalty)?;
        cfg.validate()?;

        let strong = penalty + self.reg_weight;
        let center = w * (penalty / strong);
        let smooth = strong + self.curvature_bound;
        let step = 1.0 / smooth;
        let momentum = (smooth.sqrt() - strong.sqrt()) / (smooth.sqrt() + strong.sqrt());

        let mut margins = DVector::zeros(self.num_samples());
        let mut grad = DVector::zeros(self.dim());
        let mut x = center.clone();
        let mut y = center.clone();
        let mut next = DVector::zeros(self.dim());

        for iter in 1..=cfg.max_inner_iterations {
            self.data_gradient_into(&y, &mut margins, &mut grad);
            // next = y − step · (∇data(y) + strong · (y − center))
            next.copy_from(&y);
            next.axpy(-step, &grad, 1.0);
            next.axpy(-step * strong, &y, 1.0);
            next.axpy(step * strong, &center, 1.0);

            let moved = (&next - &x).norm();
            // y = next + momentum · (next − x)
            y.copy_from(&next);
            y.axpy(momentum, &next, 1.0);
            y.axpy(-momentum, &x, 1.0);
            std::mem::swap(&mut x, &mut next);

            if moved < cfg.threshold {
                return Ok(ProxOutcome {
                    x,
                    iterations: iter,
                    converged: true,
                });
            }
        }
        Ok(ProxOutcome {
            x,
            iterations: cfg.max_inner_iterations,
            converged: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cost(rng: &mut ChaCha8Rng, m: usize, p: usize, reg: f64) -> LogisticRegressionCost {
        let a = DMatrix::from_fn(m, p, |_, _| rng.random_range(-1.5..1.5));
        let b = DVector::from_fn(m, |_, _| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
        LogisticRegressionCost::new(a, b, reg).unwrap()
    }

    fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cost_at_origin_is_m_log_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cost = random_cost(&mut rng, 7, 3, 0.0);
        let f0 = cost.eval(&DVector::zeros(3)).unwrap();
        assert!((f0 - 7.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn scalar_prox_matches_bisection() {
        // x (1 + e^x) = 1, i.e. x − e^{−x}/(1 + e^{−x}) = 0.
        let cost =
            LogisticRegressionCost::new(DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, 1.0), 0.0).unwrap();
        let out = cost.prox(&DVector::zeros(1), 1.0, &ProxConfig::new(1e-10)).unwrap();
        let root = bisect(-5.0, 5.0, |x| x - sigmoid_neg(x));
        assert!(out.converged);
        assert!((out.x[0] - root).abs() < 1e-8);
        assert!((root - 0.401058).abs() < 1e-6);
    }

    #[test]
    fn zero_features_shrink_towards_origin() {
        let cost = LogisticRegressionCost::new(DMatrix::zeros(4, 2), DVector::from_element(4, 1.0), 3.0).unwrap();
        let w = DVector::from_vec(vec![2.0, -1.0]);
        let out = cost.prox(&w, 1.0, &ProxConfig::new(1e-12)).unwrap();
        assert!((out.x - w * 0.25).norm() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cost = random_cost(&mut rng, 12, 5, 0.7);
        let x = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
        let g = cost.gradient(&x).unwrap();
        let h = 1e-6;
        for d in 0..5 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[d] += h;
            xm[d] -= h;
            let fd = (cost.eval(&xp).unwrap() - cost.eval(&xm).unwrap()) / (2.0 * h);
            assert!((fd - g[d]).abs() < 1e-5, "component {d}: {fd} vs {}", g[d]);
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cost = random_cost(&mut rng, 9, 3, 0.2);
        let x = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let hess = cost.hessian(&x).unwrap();
        let h = 1e-6;
        for d in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[d] += h;
            xm[d] -= h;
            let col = (cost.gradient(&xp).unwrap() - cost.gradient(&xm).unwrap()) / (2.0 * h);
            assert!((col - hess.column(d)).norm() < 1e-6);
        }
    }

    #[test]
    fn prox_output_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cost = random_cost(&mut rng, 20, 6, 2.0);
        let w = DVector::from_fn(6, |_, _| rng.random_range(-3.0..3.0));
        let out = cost.prox(&w, 4.0, &ProxConfig::new(1e-13)).unwrap();
        assert!(out.converged);
        let stationarity = cost.gradient(&out.x).unwrap() + (&out.x - &w) * 4.0;
        assert!(stationarity.norm() < 1e-9);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cost = random_cost(&mut rng, 20, 6, 0.0);
        let cfg = ProxConfig {
            threshold: 1e-14,
            max_inner_iterations: 2,
        };
        let out = cost.prox(&DVector::from_element(6, 3.0), 0.1, &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
    }

    #[test]
    fn numerically_stable_for_large_margins() {
        assert!((softplus_neg(800.0)).abs() < 1e-300);
        assert!((softplus_neg(-800.0) - 800.0).abs() < 1e-9);
        assert_eq!(sigmoid_neg(1000.0), 0.0);
        assert_eq!(sigmoid_neg(-1000.0), 1.0);
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(LogisticRegressionCost::new(DMatrix::zeros(2, 1), DVector::from_vec(vec![1.0, 0.0]), 0.0).is_err());
        assert!(LogisticRegressionCost::new(DMatrix::zeros(2, 1), DVector::from_vec(vec![1.0, -1.0]), -0.1).is_err());
    }
}
