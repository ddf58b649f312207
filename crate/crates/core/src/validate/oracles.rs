//! Slow, independent reference solvers for proximal operators.

use nalgebra::DVector;

use crate::cost::{LinearRegressionCost, LogisticRegressionCost};

/// Gradient descent on `‖Ax − b‖² + (ε/2)‖x‖² + (r/2)‖x − w‖²` with step
/// `1/L`, run until the gradient is below `1e−13` or 2·10⁶ steps.
pub fn linear_prox_by_gradient_descent(cost: &LinearRegressionCost, w: &DVector<f64>, penalty: f64) -> DVector<f64> {
    let a = cost.features();
    let b = cost.targets();
    let eps = cost.reg_weight();
    // Frobenius norm bounds the spectral norm.
    let lipschitz = 2.0 * a.norm_squared() + eps + penalty;
    let mut x = w.clone();
    for _ in 0..2_000_000 {
        let grad = a.tr_mul(&(a * &x - b)) * 2.0 + &x * eps + (&x - w) * penalty;
        if grad.norm() < 1e-13 {
            break;
        }
        x -= grad / lipschitz;
    }
    x
}

/// Bisection on the derivative of the scalar prox objective
/// `Σ log(1 + exp(−b_h a_h x)) + (ε/2)x² + (r/2)(x − w)²`.
pub fn scalar_logistic_prox_by_bisection(cost: &LogisticRegressionCost, w: f64, penalty: f64) -> f64 {
    assert_eq!(cost.dim(), 1, "scalar oracle needs a one-dimensional cost");
    let a = cost.features().column(0).into_owned();
    let b = cost.labels();
    let eps = cost.reg_weight();
    let derivative = |x: f64| {
        let data: f64 = a
            .iter()
            .zip(b.iter())
            .map(|(&ah, &bh)| -bh * ah / (1.0 + (bh * ah * x).exp()))
            .sum();
        data + eps * x + penalty * (x - w)
    };
    let (mut lo, mut hi) = (w - 1.0, w + 1.0);
    while derivative(lo) > 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    while derivative(hi) < 0.0 {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if derivative(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
