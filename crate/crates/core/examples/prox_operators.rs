//! Evaluates the closed-form least-squares prox and the iterative logistic
//! prox, and compares them with slow reference minimizers.
//!
//! cargo run --example prox_operators

use dot_admm::cost::{LinearRegressionCost, LogisticRegressionCost, ProxConfig};
use dot_admm::validate::{linear_prox_by_gradient_descent, scalar_logistic_prox_by_bisection};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dot_admm::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let penalty = 2.0;

    let a = DMatrix::from_fn(8, 3, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(8, |_, _| rng.random_range(-1.0..1.0));
    let linear = LinearRegressionCost::with_regularization(a, b, 0.1)?;
    let w = DVector::from_vec(vec![0.5, -1.0, 2.0]);
    let closed = linear.prox(&w, penalty)?;
    let reference = linear_prox_by_gradient_descent(&linear, &w, penalty);
    println!("least squares prox  {:.6?}", closed.as_slice());
    println!("gradient descent    {:.6?}", reference.as_slice());
    println!("difference          {:.2e}", (&closed - &reference).norm());

    let a = DMatrix::from_fn(6, 1, |_, _| rng.random_range(-2.0..2.0));
    let labels = DVector::from_fn(6, |_, _| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
    let logistic = LogisticRegressionCost::new(a, labels, 0.5)?;
    for threshold in [1e-2, 1e-6, 1e-12] {
        let out = logistic.prox(&DVector::from_element(1, 1.5), penalty, &ProxConfig::new(threshold))?;
        let exact = scalar_logistic_prox_by_bisection(&logistic, 1.5, penalty);
        println!(
            "logistic prox at threshold {threshold:.0e}: {:.12} after {} inner iterations, error {:.2e}",
            out.x[0],
            out.iterations,
            (out.x[0] - exact).abs()
        );
    }
    Ok(())
}
