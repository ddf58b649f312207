//! Property suite: operator laws, norm equivalence, quantizer laws and
//! agreement of the proximal operators with independent oracles.
//!
//! Each property reports its worst slack: the smallest margin by which a
//! case satisfied the property at its tolerance. Negative slack is a failure.

pub mod oracles;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{estimate_gamma, weighted_norm};
use crate::channel::Quantizer;
use crate::cost::{CostFamily, DatasetGenerator, LinearRegressionCost, LocalCost, LogisticRegressionCost, ProxConfig};
use crate::engine::{ExactOperator, FixedPointMap};
use crate::error::{Error, Result};
use crate::topology::Topology;

pub use oracles::{linear_prox_by_gradient_descent, scalar_logistic_prox_by_bisection};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    /// Adds the stability check of the subregularity estimator.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub worst_slack: f64,
}

impl PropertyResult {
    fn from_slacks(name: &str, slacks: impl IntoIterator<Item = f64>) -> Self {
        let mut cases = 0;
        let mut worst = f64::INFINITY;
        for s in slacks {
            cases += 1;
            // NaN slack counts as a failure.
            worst = if s.is_nan() { f64::NEG_INFINITY } else { worst.min(s) };
        }
        PropertyResult {
            name: name.to_string(),
            passed: cases > 0 && worst >= 0.0,
            cases,
            worst_slack: worst,
        }
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} cases={:<4} worst_slack={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst_slack
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub results: Vec<PropertyResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Cases per randomized property.
pub const CASES: usize = 120;

pub fn run_suite(level: Level, seed: u64) -> Result<ValidationReport> {
    let mut results = vec![
        check_averagedness(CostFamily::Linear, CASES, seed)?,
        check_averagedness(CostFamily::Logistic, CASES, seed + 1)?,
        check_nonexpansive(CostFamily::Linear, CASES, seed + 2)?,
        check_nonexpansive(CostFamily::Logistic, CASES, seed + 3)?,
        check_affinity_with(reference_linear_prox, CASES, seed + 4)?,
        check_sandwich(CASES * 10, seed + 5)?,
        check_quantizer(CASES * 10, seed + 6)?,
        check_linear_prox_oracle_with(reference_linear_prox, 50, seed + 7)?,
        check_logistic_prox_oracle(50, seed + 8)?,
    ];
    if level == Level::Full {
        results.push(check_gamma_stability(seed + 9)?);
    }
    Ok(ValidationReport { results })
}

/// A linear-regression proximal operator at a given penalty.
pub type LinearProxFn = fn(&LinearRegressionCost, &DVector<f64>, f64) -> Result<DVector<f64>>;

pub fn reference_linear_prox(cost: &LinearRegressionCost, w: &DVector<f64>, penalty: f64) -> Result<DVector<f64>> {
    cost.prox(w, penalty)
}

/// A deliberately wrong variant that drops the factor 2 of the squared
/// residual: `(AᵀA + (r + ε) I) x = r w + Aᵀb`. Still affine, but not the
/// proximal operator of the cost.
pub fn linear_prox_dropped_factor(cost: &LinearRegressionCost, w: &DVector<f64>, penalty: f64) -> Result<DVector<f64>> {
    let mut system = cost.gram().clone();
    for d in 0..cost.dim() {
        system[(d, d)] += penalty + cost.reg_weight();
    }
    let rhs = w * penalty + cost.moment();
    system.cholesky().map(|c| c.solve(&rhs)).ok_or(Error::SingularSystem)
}

struct Instance {
    topology: Topology,
    costs: Vec<LocalCost>,
    alpha: f64,
    rho: f64,
    dim: usize,
}

impl Instance {
    fn random(rng: &mut ChaCha8Rng, family: CostFamily) -> Result<Self> {
        let n = rng.random_range(3..=6);
        let max_edges = n * (n - 1) / 2;
        let m = rng.random_range(n - 1..=max_edges);
        let topology = Topology::random_connected(n, m, rng.random())?;
        let dim = rng.random_range(1..=3);
        let gen = DatasetGenerator {
            family,
            num_agents: n,
            dim,
            samples: rng.random_range(dim + 1..=8),
            reg_weight: rng.random_range(0.1..2.0),
            label_noise: 0.5,
        };
        Ok(Instance {
            topology,
            costs: gen.generate(rng)?,
            alpha: rng.random_range(0.1..0.9),
            rho: rng.random_range(0.2..3.0),
            dim,
        })
    }

    fn operator(&self) -> Result<ExactOperator<'_>> {
        ExactOperator::new(&self.topology, &self.costs, self.alpha, self.rho)
    }

    fn point(&self, rng: &mut ChaCha8Rng) -> DVector<f64> {
        DVector::from_fn(self.topology.num_edges() * self.dim, |_, _| rng.random_range(-4.0..4.0))
    }
}

/// `‖Tz − Tw‖² ≤ ‖z − w‖² − ((1 − α)/α) ‖(Id − T)z − (Id − T)w‖²`.
pub fn check_averagedness(family: CostFamily, cases: usize, seed: u64) -> Result<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slacks = (0..cases)
        .map(|_| {
            let inst = Instance::random(&mut rng, family)?;
            let op = inst.operator()?;
            let (z, w) = (inst.point(&mut rng), inst.point(&mut rng));
            let (tz, tw) = (op.apply(&z)?, op.apply(&w)?);
            let gap = (&z - &tz) - (&w - &tw);
            let lhs = (&tz - &tw).norm_squared();
            let rhs = (&z - &w).norm_squared() - (1.0 - inst.alpha) / inst.alpha * gap.norm_squared();
            Ok(rhs - lhs + 1e-9 * (1.0 + (&z - &w).norm_squared()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyResult::from_slacks(&format!("averagedness ({family})"), slacks))
}

/// `‖Tz − Tw‖ ≤ ‖z − w‖`.
pub fn check_nonexpansive(family: CostFamily, cases: usize, seed: u64) -> Result<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slacks = (0..cases)
        .map(|_| {
            let inst = Instance::random(&mut rng, family)?;
            let op = inst.operator()?;
            let (z, w) = (inst.point(&mut rng), inst.point(&mut rng));
            let lhs = (op.apply(&z)? - op.apply(&w)?).norm();
            let rhs = (&z - &w).norm();
            Ok(rhs * (1.0 + 1e-10) + 1e-12 - lhs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyResult::from_slacks(
        &format!("nonexpansiveness ({family})"),
        slacks,
    ))
}

/// Compact-form operator with the local proximal step supplied by `prox`.
fn compact_apply(
    topology: &Topology,
    costs: &[LinearRegressionCost],
    alpha: f64,
    rho: f64,
    z: &DVector<f64>,
    prox: LinearProxFn,
) -> Result<DVector<f64>> {
    let p = costs[0].dim();
    let ops = topology.operators(p, rho);
    let w = ops.apply_d(&ops.apply_at(z)?)?;
    let mut x = DVector::zeros(w.len());
    for (i, cost) in costs.iter().enumerate() {
        let wi = w.rows(i * p, p).into_owned();
        x.rows_mut(i * p, p)
            .copy_from(&prox(cost, &wi, rho * topology.degree(i) as f64)?);
    }
    Ok(z * (1.0 - alpha) - ops.apply_p(z)? * alpha + ops.apply_p(&ops.apply_a(&x)?)? * (2.0 * alpha * rho))
}

fn linear_costs(costs: &[LocalCost]) -> Vec<LinearRegressionCost> {
    costs
        .iter()
        .map(|c| match c {
            LocalCost::Linear(l) => l.clone(),
            LocalCost::Logistic(_) => unreachable!("linear instance"),
        })
        .collect()
}

/// For quadratic costs `T(t z + (1 − t) w) = t T(z) + (1 − t) T(w)`.
pub fn check_affinity_with(prox: LinearProxFn, cases: usize, seed: u64) -> Result<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slacks = (0..cases)
        .map(|_| {
            let inst = Instance::random(&mut rng, CostFamily::Linear)?;
            let costs = linear_costs(&inst.costs);
            let apply = |v: &DVector<f64>| compact_apply(&inst.topology, &costs, inst.alpha, inst.rho, v, prox);
            let (z, w) = (inst.point(&mut rng), inst.point(&mut rng));
            let t = rng.random_range(-1.0..2.0);
            let mixed = apply(&(&z * t + &w * (1.0 - t)))?;
            let combined = apply(&z)? * t + apply(&w)? * (1.0 - t);
            Ok(1e-10 * (1.0 + combined.norm()) - (mixed - combined).norm())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyResult::from_slacks("affinity (linear)", slacks))
}

/// `p̲ |||z|||² ≤ ‖z‖² ≤ p̄ |||z|||²`.
pub fn check_sandwich(cases: usize, seed: u64) -> Result<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slacks = (0..cases)
        .map(|_| {
            let len = rng.random_range(1..40);
            let z = DVector::from_fn(len, |_, _| rng.random_range(-10.0..10.0));
            let probs: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..=1.0)).collect();
            let lo = probs.iter().copied().fold(1.0, f64::min);
            let hi = probs.iter().copied().fold(0.0, f64::max);
            let weighted = weighted_norm(&z, &probs)?.powi(2);
            let plain = z.norm_squared();
            let tol = 1e-12 * plain.max(1e-300);
            Ok((plain - lo * weighted + tol).min(hi * weighted - plain + tol))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyResult::from_slacks("norm sandwich", slacks))
}

/// Idempotence everywhere and `0 ≤ v − Q(v) ≤ δ` inside the range.
pub fn check_quantizer(cases: usize, seed: u64) -> Result<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slacks = (0..cases)
        .map(|_| {
            let delta = 10f64.powf(rng.random_range(-6.0..0.0));
            let q = Quantizer::new(delta, 10.0)?;
            let v = rng.random_range(-15.0..15.0);
            let once = q.quantize_value(v);
            let idempotent = if q.quantize_value(once) == once { 0.0 } else { -1.0 };
            let accuracy = if v.abs() < 10.0 - delta {
                let err = v - once;
                err.min(delta - err)
            } else {
                0.0
            };
            Ok(f64::min(idempotent, accuracy))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyResult::from_slacks("quantizer laws", slacks))
}

/// Closed-form linear prox against gradient descent, tolerance `1e−8`.
pub fn check_linear_prox_oracle_with(prox: LinearProxFn, cases: usize, seed: u64) -> Result<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slacks = (0..cases)
        .map(|_| {
            let m = rng.random_range(1..8);
            let p = rng.random_range(1..5);
            let a = DMatrix::from_fn(m, p, |_, _| rng.random_range(-1.0..1.0));
            let b = DVector::from_fn(m, |_, _| rng.random_range(-2.0..2.0));
            let cost = LinearRegressionCost::with_regularization(a, b, rng.random_range(0.0..1.0))?;
            let w = DVector::from_fn(p, |_, _| rng.random_range(-3.0..3.0));
            let penalty = rng.random_range(0.5..5.0);
            let err = (prox(&cost, &w, penalty)? - linear_prox_by_gradient_descent(&cost, &w, penalty)).norm();
            Ok(1e-8 - err)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyResult::from_slacks("linear prox vs descent oracle", slacks))
}

/// Iterative logistic prox at threshold `1e−12` against bisection, tolerance `1e−6`.
pub fn check_logistic_prox_oracle(cases: usize, seed: u64) -> Result<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = ProxConfig::new(1e-12);
    let slacks = (0..cases)
        .map(|_| {
            let m = rng.random_range(1..10);
            let a = DMatrix::from_fn(m, 1, |_, _| rng.random_range(-3.0..3.0));
            let b = DVector::from_fn(m, |_, _| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
            let cost = LogisticRegressionCost::new(a, b, rng.random_range(0.0..2.0))?;
            let w = rng.random_range(-5.0..5.0);
            let penalty = rng.random_range(0.2..5.0);
            let out = cost.prox(&DVector::from_element(1, w), penalty, &cfg)?;
            let err = (out.x[0] - scalar_logistic_prox_by_bisection(&cost, w, penalty)).abs();
            Ok(if out.converged { 1e-6 - err } else { -1.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyResult::from_slacks("logistic prox vs bisection oracle", slacks))
}

/// `T(z) = z − s (Q z − c)` for a strongly convex quadratic.
struct GradientStep {
    q: DMatrix<f64>,
    c: DVector<f64>,
    step: f64,
}

impl FixedPointMap for GradientStep {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn apply(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(z - (&self.q * z - &self.c) * self.step)
    }
}

/// Estimates from 50, 100 and 200 samples agree within 20% of the largest.
pub fn check_gamma_stability(seed: u64) -> Result<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
    let q = m.tr_mul(&m) + DMatrix::identity(4, 4) * 0.5;
    let step = 0.5 / q.norm();
    let c = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
    let z_star = q.clone().cholesky().ok_or(Error::SingularSystem)?.solve(&c);
    let map = GradientStep { q, c, step };
    let estimates = [50, 100, 200]
        .iter()
        .map(|&samples| Ok(estimate_gamma(&map, &z_star, samples, 1.0, &mut rng)?.gamma))
        .collect::<Result<Vec<f64>>>()?;
    let reference = estimates[2];
    let slacks: Vec<f64> = estimates
        .iter()
        .map(|g| {
            if g.is_finite() {
                0.2 - (g / reference - 1.0).abs()
            } else {
                -1.0
            }
        })
        .collect();
    Ok(PropertyResult::from_slacks("subregularity estimate stability", slacks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let report = run_suite(Level::Quick, 11).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.results.iter().all(|r| r.cases >= 50));
    }

    #[test]
    fn dropped_factor_is_affine_but_fails_the_oracle() {
        assert!(check_affinity_with(linear_prox_dropped_factor, 30, 3).unwrap().passed);
        let oracle = check_linear_prox_oracle_with(linear_prox_dropped_factor, 30, 3).unwrap();
        assert!(!oracle.passed && oracle.worst_slack < -1e-3);
    }

    #[test]
    fn gamma_stability_holds() {
        let r = check_gamma_stability(5).unwrap();
        assert!(r.passed, "{r}");
    }

    #[test]
    fn empty_or_nan_slack_fails() {
        assert!(!PropertyResult::from_slacks("x", []).passed);
        assert!(!PropertyResult::from_slacks("x", [1.0, f64::NAN]).passed);
        assert!(PropertyResult::from_slacks("x", [0.0, 2.0]).passed);
    }
}
