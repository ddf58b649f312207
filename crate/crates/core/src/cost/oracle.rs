use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::LocalCost;
use crate::error::{Error, Result};

const GRADIENT_TOLERANCE: f64 = 1e-12;
const MAX_NEWTON_STEPS: usize = 200;

fn summed_gradient(costs: &[LocalCost], x: &DVector<f64>) -> Result<DVector<f64>> {
    let mut g = DVector::zeros(x.len());
    for c in costs {
        g += c.gradient(x)?;
    }
    Ok(g)
}

fn summed_hessian(costs: &[LocalCost], x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let mut h = DMatrix::zeros(x.len(), x.len());
    for c in costs {
        h += c.hessian(x)?;
    }
    Ok(h)
}

fn summed_cost(costs: &[LocalCost], x: &DVector<f64>) -> Result<f64> {
    costs.iter().map(|c| c.eval(x)).sum()
}

fn ensure_nonsingular(h: &DMatrix<f64>) -> Result<()> {
    let eig = SymmetricEigen::new(h.clone()).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    if max <= 0.0 || min <= 1e-12 * max {
        Err(Error::NoUniqueMinimizer)
    } else {
        Ok(())
    }
}

/// Minimizer of `Σ_i f_i` over a common `x`, used as ground truth.
///
/// Purely quadratic problems are solved from the normal equations; anything
/// else runs damped Newton until the summed gradient norm is at most `1e-12`.
pub fn centralized_minimizer(costs: &[LocalCost]) -> Result<DVector<f64>> {
    let first = costs.first().ok_or_else(|| Error::invalid("no costs supplied"))?;
    let dim = first.dim();
    let zero = DVector::zeros(dim);

    if costs.iter().all(|c| matches!(c, LocalCost::Linear(_))) {
        let hess = summed_hessian(costs, &zero)?;
        ensure_nonsingular(&hess)?;
        // ∇F(0) = −Σ 2Aᵀb, so H x* = −∇F(0).
        let rhs = -summed_gradient(costs, &zero)?;
        let chol = Cholesky::new(hess).ok_or(Error::NoUniqueMinimizer)?;
        return Ok(chol.solve(&rhs));
    }

    let mut x = zero;
    for _ in 0..MAX_NEWTON_STEPS {
        let g = summed_gradient(costs, &x)?;
        if g.norm() <= GRADIENT_TOLERANCE {
            return Ok(x);
        }
        let hess = summed_hessian(costs, &x)?;
        let chol = Cholesky::new(hess.clone()).ok_or(Error::NoUniqueMinimizer)?;
        let dir = -chol.solve(&g);
        let decrement = -g.dot(&dir);
        if decrement < 1e-16 {
            // Cost differences are below rounding; a full step is safe here.
            x += dir;
            continue;
        }
        let f0 = summed_cost(costs, &x)?;
        let mut t = 1.0;
        loop {
            let trial = &x + &dir * t;
            if summed_cost(costs, &trial)? <= f0 - 1e-4 * t * decrement || t < 1e-12 {
                x = trial;
                break;
            }
            t *= 0.5;
        }
    }
    let residual = summed_gradient(costs, &x)?.norm();
    if residual <= GRADIENT_TOLERANCE {
        Ok(x)
    } else {
        ensure_nonsingular(&summed_hessian(costs, &x)?)?;
        Err(Error::NonConvergent(format!(
            "centralized Newton stopped with gradient norm {residual:e}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{LinearRegressionCost, LogisticRegressionCost};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_design_recovers_targets() {
        let v = DVector::from_vec(vec![1.5, -2.0, 0.25]);
        let cost = LinearRegressionCost::new(DMatrix::identity(3, 3), v.clone()).unwrap();
        let x = centralized_minimizer(&[cost.into()]).unwrap();
        assert!((x - v).norm() < 1e-14);
    }

    #[test]
    fn linear_matches_long_gradient_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let costs: Vec<LocalCost> = (0..4)
            .map(|_| {
                let a = DMatrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
                let b = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
                LinearRegressionCost::new(a, b).unwrap().into()
            })
            .collect();
        let x = centralized_minimizer(&costs).unwrap();

        let lipschitz: f64 = costs
            .iter()
            .map(|c| match c {
                LocalCost::Linear(l) => 2.0 * l.features().norm_squared(),
                _ => unreachable!(),
            })
            .sum();
        let mut y = DVector::zeros(3);
        for _ in 0..200_000 {
            let g = summed_gradient(&costs, &y).unwrap();
            if g.norm() < 1e-13 {
                break;
            }
            y -= g / lipschitz;
        }
        assert!((x - y).norm() < 1e-8);
    }

    #[test]
    fn singular_linear_problem_is_refused() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let cost = LinearRegressionCost::new(a, DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert!(matches!(
            centralized_minimizer(&[cost.into()]),
            Err(Error::NoUniqueMinimizer)
        ));
    }

    #[test]
    fn regularized_logistic_with_identical_samples() {
        let a = DMatrix::from_fn(6, 3, |_, d| 0.5 + d as f64);
        let cost = LogisticRegressionCost::new(a, DVector::from_element(6, 1.0), 0.5).unwrap();
        let costs = vec![LocalCost::from(cost)];
        let x = centralized_minimizer(&costs).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
        assert!(summed_gradient(&costs, &x).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn random_logistic_reaches_gradient_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let costs: Vec<LocalCost> = (0..10)
            .map(|_| {
                let a = DMatrix::from_fn(20, 16, |_, _| rng.random_range(-2.0..2.0));
                let b = DVector::from_fn(20, |_, _| if rng.random_bool(0.6) { 1.0 } else { -1.0 });
                LogisticRegressionCost::new(a, b, 5.0).unwrap().into()
            })
            .collect();
        let x = centralized_minimizer(&costs).unwrap();
        assert!(summed_gradient(&costs, &x).unwrap().norm() <= 1e-12);
    }
}
