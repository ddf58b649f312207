//! Rate constants, mean error bounds, fixed-point geometry and per-tick metrics.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cost::{CostStream, LocalCost};
use crate::engine::{AgentSystem, AlgorithmParams, ExactOperator, FixedPointMap};
use crate::error::{check_dim, Error, Result};
use crate::topology::Topology;

/// Constants of the linear mean-convergence bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParameters {
    pub alpha: f64,
    /// Smallest activation probability.
    pub p_min: f64,
    /// Largest activation probability.
    pub p_max: f64,
    /// Metric subregularity constant of the operator.
    pub gamma: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Bound on the mean norm of the per-tick perturbation.
    pub nu_e: f64,
    /// Bound on the fixed-point drift between consecutive ticks.
    pub sigma: f64,
}

/// `μ = √(1 − (1 − α) p̲ / (α λ))` with `λ = max{γ², (1 − α) p̲ / α}`, nudged
/// up so the inequality is strict and `μ > 0`.
pub fn compute_mu(alpha: f64, p_min: f64, gamma: f64) -> Result<RateParameters> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(p_min > 0.0 && p_min <= 1.0) {
        return Err(Error::invalid(format!("p_min must lie in (0, 1], got {p_min}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    let floor = (1.0 - alpha) * p_min / alpha;
    let lambda = (gamma * gamma).max(floor * (1.0 + 1e-9));
    let mu = (1.0 - floor / lambda).sqrt();
    Ok(RateParameters {
        alpha,
        p_min,
        p_max: p_min,
        gamma,
        lambda,
        mu,
        nu_e: 0.0,
        sigma: 0.0,
    })
}

impl RateParameters {
    pub fn with_p_max(mut self, p_max: f64) -> Result<Self> {
        if !(p_max >= self.p_min && p_max <= 1.0) {
            return Err(Error::invalid(format!("p_max must lie in [p_min, 1], got {p_max}")));
        }
        self.p_max = p_max;
        Ok(self)
    }

    pub fn with_noise(mut self, nu_e: f64) -> Self {
        self.nu_e = nu_e;
        self
    }

    pub fn with_drift(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// `√(p̄ / p̲)`.
    pub fn norm_ratio(&self) -> f64 {
        (self.p_max / self.p_min).sqrt()
    }

    /// Limit of the mean bound under constant perturbation `ν_e`:
    /// `√(p̄/p̲) (ν_e + μσ) / (1 − μ)`.
    pub fn asymptote(&self) -> f64 {
        self.norm_ratio() * (self.nu_e + self.mu * self.sigma) / (1.0 - self.mu)
    }
}

/// Mean bound on the distance to the fixed-point set after `k` ticks:
/// `√(p̄/p̲) [μᵏ d0 + Σ_{h=1..k} μ^{k−h} (E‖e_h‖ + μσ)]`.
///
/// `err_means[h − 1]` is `E‖e_h‖`; ticks past the end of the slice reuse its
/// last entry and an empty slice means no perturbation.
pub fn mean_error_bound(rp: &RateParameters, d0: f64, err_means: &[f64], k: usize) -> f64 {
    mean_error_bound_curve(rp, d0, err_means, k)[k]
}

/// The bound for every `k` in `0..=horizon`.
pub fn mean_error_bound_curve(rp: &RateParameters, d0: f64, err_means: &[f64], horizon: usize) -> Vec<f64> {
    let ratio = rp.norm_ratio();
    let err = |h: usize| err_means.get(h - 1).or(err_means.last()).copied().unwrap_or(0.0);
    let mut acc = d0;
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(ratio * acc);
    for h in 1..=horizon {
        acc = rp.mu * acc + err(h) + rp.mu * rp.sigma;
        out.push(ratio * acc);
    }
    out
}

/// `|||z||| = √(Σ z_ℓ² / p_ℓ)`.
pub fn weighted_norm(z: &DVector<f64>, probs: &[f64]) -> Result<f64> {
    check_dim(z.len(), probs.len())?;
    if probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::invalid("weights must lie in (0, 1]"));
    }
    Ok(z.iter().zip(probs).map(|(v, p)| v * v / p).sum::<f64>().sqrt())
}

/// Repeats each per-edge probability over its `dim` coordinates.
pub fn expand_blocks(probs: &[f64], dim: usize) -> Vec<f64> {
    probs.iter().flat_map(|&p| std::iter::repeat_n(p, dim)).collect()
}

/// The affine set of fixed points of the exact operator for a static problem.
///
/// `z` is a fixed point exactly when, with `x*` the common minimizer and
/// `g_i = ∇f_i(x*)`: `z_ij + z_ji = 2ρ x*` for `i ≠ j`, `z_ii = ρ x*` and
/// `Σ_j z_ij = ρ η_i x* + g_i`. The constraints act on each coordinate
/// separately with a shared matrix, so projection uses one pseudo-inverse.
#[derive(Debug, Clone)]
pub struct FixedPointSet {
    dim: usize,
    constraints: DMatrix<f64>,
    /// `Cᵀ (C Cᵀ)⁺`.
    lift: DMatrix<f64>,
    /// Right-hand sides, one column per coordinate.
    targets: DMatrix<f64>,
}

impl FixedPointSet {
    pub fn new(topology: &Topology, costs: &[LocalCost], x_star: &DVector<f64>, rho: f64) -> Result<Self> {
        check_dim(topology.num_agents(), costs.len())?;
        let p = x_star.len();
        let n = topology.num_agents();
        let xi = topology.num_edges();
        let pairs: Vec<(usize, usize)> = topology.undirected_edges().collect();
        let rows = pairs.len() + 2 * n;
        let mut constraints = DMatrix::zeros(rows, xi);
        let mut targets = DMatrix::zeros(rows, p);
        for (r, &(i, j)) in pairs.iter().enumerate() {
            let e = topology.edge_index(i, j).expect("listed pair is an edge");
            constraints[(r, e)] = 1.0;
            constraints[(r, topology.reverse_edge(e))] = 1.0;
            targets.row_mut(r).copy_from(&(x_star * (2.0 * rho)).transpose());
        }
        for (i, cost) in costs.iter().enumerate() {
            let g = cost.gradient(x_star)?;
            let r = pairs.len() + i;
            constraints[(r, topology.edge_index(i, i).expect("self-loop"))] = 1.0;
            targets.row_mut(r).copy_from(&(x_star * rho).transpose());
            let r = pairs.len() + n + i;
            for e in topology.agent_edges(i) {
                constraints[(r, e)] = 1.0;
            }
            let eta = topology.degree(i) as f64;
            targets.row_mut(r).copy_from(&(x_star * (rho * eta) + g).transpose());
        }
        let gram = &constraints * constraints.transpose();
        let pinv = gram
            .pseudo_inverse(1e-10)
            .map_err(|msg| Error::NonConvergent(format!("fixed-point constraints: {msg}")))?;
        let lift = constraints.transpose() * pinv;
        Ok(FixedPointSet {
            dim: p,
            constraints,
            lift,
            targets,
        })
    }

    fn as_blocks(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.constraints.ncols() * self.dim, z.len())?;
        Ok(DMatrix::from_row_slice(
            self.constraints.ncols(),
            self.dim,
            z.as_slice(),
        ))
    }

    /// Euclidean projection onto the fixed-point set.
    pub fn project(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let blocks = self.as_blocks(z)?;
        let violation = &self.constraints * &blocks - &self.targets;
        let projected = blocks - &self.lift * violation;
        Ok(DVector::from_iterator(z.len(), projected.transpose().iter().copied()))
    }

    pub fn distance(&self, z: &DVector<f64>) -> Result<f64> {
        let blocks = self.as_blocks(z)?;
        let violation = &self.constraints * &blocks - &self.targets;
        Ok((&self.lift * violation).norm())
    }
}

/// Outcome of the empirical metric subregularity estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaEstimate {
    pub gamma: f64,
    /// Samples that entered the maximum.
    pub used: usize,
    /// Samples skipped because they were already fixed points.
    pub skipped: usize,
}

const LIMIT_RESIDUAL: f64 = 1e-10;
const SKIP_RESIDUAL: f64 = 1e-12;
const MAX_LIMIT_ITERATIONS: usize = 200_000;

/// Runs `z ← T(z)` until `‖z − T(z)‖ ≤ 1e−10`.
pub fn iterate_to_fixed_point<T: FixedPointMap + ?Sized>(op: &T, z: &DVector<f64>) -> Result<DVector<f64>> {
    let mut z = z.clone();
    for _ in 0..MAX_LIMIT_ITERATIONS {
        let next = op.apply(&z)?;
        let residual = (&next - &z).norm();
        z = next;
        if residual <= LIMIT_RESIDUAL {
            return Ok(z);
        }
    }
    Err(Error::NonConvergent(format!(
        "exact iteration did not reach residual {LIMIT_RESIDUAL} in {MAX_LIMIT_ITERATIONS} steps"
    )))
}

/// Iterates whose residual is below this are not used as samples: the
/// distance to the computed limit is only accurate to about `γ · 1e−10`.
const TRAJECTORY_RESIDUAL: f64 = 1e-6;

/// `max ‖w − limit‖ / ‖(Id − T) w‖` over the given points and their exact
/// iterates `w = Tᵗ z`, where `limit` is the fixed point the iteration from
/// `z` reaches. Iterates stay within the starting distance of any fixed
/// point, and late ones align with the slowest-converging directions.
pub fn gamma_ratio_max<T: FixedPointMap + ?Sized>(op: &T, points: &[DVector<f64>]) -> Result<GammaEstimate> {
    let mut est = GammaEstimate {
        gamma: 0.0,
        used: 0,
        skipped: 0,
    };
    for z in points {
        let mut next = op.apply(z)?;
        let mut residual = (z - &next).norm();
        if residual < SKIP_RESIDUAL {
            est.skipped += 1;
            continue;
        }
        let mut trajectory = vec![(z.clone(), residual)];
        let mut current = next.clone();
        let mut steps = 0;
        while residual > LIMIT_RESIDUAL {
            steps += 1;
            if steps > MAX_LIMIT_ITERATIONS {
                return Err(Error::NonConvergent(format!(
                    "exact iteration did not reach residual {LIMIT_RESIDUAL} in {MAX_LIMIT_ITERATIONS} steps"
                )));
            }
            next = op.apply(&current)?;
            residual = (&current - &next).norm();
            if residual >= TRAJECTORY_RESIDUAL {
                trajectory.push((current.clone(), residual));
            }
            current = next.clone();
        }
        for (w, r) in &trajectory {
            est.gamma = est.gamma.max((w - &current).norm() / r);
        }
        est.used += 1;
    }
    Ok(est)
}

/// Estimates the metric subregularity constant from `samples` points drawn
/// uniformly from the ball of `radius` around the fixed point `z_star`.
pub fn estimate_gamma<T: FixedPointMap + ?Sized, R: Rng>(
    op: &T,
    z_star: &DVector<f64>,
    samples: usize,
    radius: f64,
    rng: &mut R,
) -> Result<GammaEstimate> {
    check_dim(op.dim(), z_star.len())?;
    if samples == 0 || !(radius > 0.0) {
        return Err(Error::invalid("gamma estimation needs samples > 0 and radius > 0"));
    }
    let residual = op.residual(z_star)?;
    if residual > 1e-9 {
        return Err(Error::NonConvergent(format!(
            "reference point is not a fixed point (residual {residual:.3e})"
        )));
    }
    let dim = z_star.len();
    let points: Vec<DVector<f64>> = (0..samples)
        .map(|_| {
            let dir = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let scale = radius * rng.random::<f64>().powf(1.0 / dim as f64) / dir.norm();
            z_star + dir * scale
        })
        .collect();
    let est = gamma_ratio_max(op, &points)?;
    if est.used == 0 {
        return Err(Error::NonConvergent("every sample was already a fixed point".into()));
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickMetrics {
    pub k: usize,
    /// `√(Σ_i ‖x_i − x*‖²)` against the optimum of the current cost.
    pub tracking_error: f64,
    /// `max_{i,j} ‖x_i − x_j‖`.
    pub consensus_error: f64,
    /// `‖z − T(z)‖` for the exact operator of the current cost.
    pub fixed_point_residual: Option<f64>,
    /// Exact distance from `z` to the fixed-point set.
    pub fixed_point_distance: Option<f64>,
    /// Mean bound on the fixed-point distance.
    pub theory_bound: Option<f64>,
}

/// Tracking and consensus errors of stacked local models.
pub fn model_errors(x: &DVector<f64>, x_star: &DVector<f64>) -> Result<(f64, f64)> {
    let p = x_star.len();
    if p == 0 || !x.len().is_multiple_of(p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: x.len(),
        });
    }
    let n = x.len() / p;
    let block = |i: usize| x.rows(i * p, p);
    let tracking = (0..n).map(|i| (block(i) - x_star).norm_squared()).sum::<f64>().sqrt();
    let mut consensus: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            consensus = consensus.max((block(i) - block(j)).norm());
        }
    }
    Ok((tracking, consensus))
}

/// Measures a system after each tick against the optima of a cost stream.
#[derive(Debug, Clone)]
pub struct MetricsProbe {
    optima: Vec<DVector<f64>>,
    fixed_sets: Option<Vec<FixedPointSet>>,
    residual: bool,
}

impl MetricsProbe {
    /// `optima[s]` is the minimizer of segment `s` of the stream.
    pub fn new(optima: Vec<DVector<f64>>) -> Self {
        MetricsProbe {
            optima,
            fixed_sets: None,
            residual: false,
        }
    }

    pub fn with_residual(mut self, on: bool) -> Self {
        self.residual = on;
        self
    }

    pub fn with_fixed_sets(mut self, sets: Vec<FixedPointSet>) -> Self {
        self.fixed_sets = Some(sets);
        self
    }

    pub fn optima(&self) -> &[DVector<f64>] {
        &self.optima
    }

    pub fn measure(&self, sys: &AgentSystem, stream: &CostStream, params: &AlgorithmParams) -> Result<TickMetrics> {
        let k = sys.tick();
        let segment = stream.segment_index_at(k);
        let x_star = self
            .optima
            .get(segment)
            .ok_or_else(|| Error::invalid(format!("no optimum for segment {segment}")))?;
        let (tracking_error, consensus_error) = model_errors(sys.x(), x_star)?;
        let fixed_point_residual = if self.residual {
            let op = ExactOperator::new(sys.topology(), stream.costs_at(k), params.alpha, params.rho)?;
            Some(op.residual(sys.z())?)
        } else {
            None
        };
        let fixed_point_distance = match &self.fixed_sets {
            Some(sets) => Some(
                sets.get(segment)
                    .ok_or_else(|| Error::invalid(format!("no fixed-point set for segment {segment}")))?
                    .distance(sys.z())?,
            ),
            None => None,
        };
        Ok(TickMetrics {
            k,
            tracking_error,
            consensus_error,
            fixed_point_residual,
            fixed_point_distance,
            theory_bound: None,
        })
    }
}

/// Least-squares fit of `ln(curve)` against the tick index.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// `exp(slope)`: the per-tick contraction factor.
    pub rate: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub window: Range<usize>,
}

pub fn log_linear_fit(curve: &[f64], window: Range<usize>) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = window
        .clone()
        .filter_map(|k| {
            curve
                .get(k)
                .filter(|v| **v > 0.0 && v.is_finite())
                .map(|v| (k as f64, v.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let slope_stderr = (sse / (m - 2.0) / sxx).sqrt();
    Some(RateFit {
        rate: slope.exp(),
        slope,
        slope_stderr,
        window,
    })
}

/// The linearly decaying stretch of an error curve: from the first value
/// below a tenth of the peak to the first value within a factor 100 of
/// `floor`.
pub fn transient_window(curve: &[f64], floor: f64) -> Range<usize> {
    let peak = curve.iter().copied().fold(0.0, f64::max);
    let start = curve.iter().position(|&v| v <= 0.1 * peak).unwrap_or(curve.len());
    let end = curve[start..]
        .iter()
        .position(|&v| v <= 100.0 * floor || v <= 0.0)
        .map_or(curve.len(), |o| start + o);
    start..end
}

/// Mean of the final tenth of a curve (at least one value).
pub fn tail_mean(curve: &[f64]) -> f64 {
    if curve.is_empty() {
        return f64::NAN;
    }
    let len = (curve.len() / 10).max(1);
    let tail = &curve[curve.len() - len..];
    tail.iter().sum::<f64>() / len as f64
}

/// Rate of the transient of an error curve that settles at its tail mean.
pub fn empirical_rate(curve: &[f64]) -> Option<RateFit> {
    let window = transient_window(curve, tail_mean(curve));
    if window.len() < 5 {
        return None;
    }
    log_linear_fit(curve, window)
}
