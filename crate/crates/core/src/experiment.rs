//! Scenarios, Monte Carlo trials and parameter sweeps.
//!
//! All randomness derives from `master_seed`: the dataset, the graph, the
//! optional subregularity estimate and every trial use separate ChaCha
//! streams, so sweeps compare paired runs on the same topology and data.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    compute_mu, empirical_rate, estimate_gamma, gamma_ratio_max, log_linear_fit, mean_error_bound_curve, tail_mean,
    FixedPointSet, GammaEstimate, MetricsProbe, RateFit, RateParameters, TickMetrics,
};
use crate::channel::{ChannelModel, Noise, Quantizer};
use crate::cost::{
    centralized_minimizer, load_dataset_csv, CostFamily, CostStream, DatasetGenerator, PiecewiseStreamBuilder,
    ProxConfig,
};
use crate::engine::{run, AgentSystem, AlgorithmParams, ExactOperator};
use crate::error::{Error, Result};
use crate::topology::Topology;

const DATA_STREAM: u64 = 1;
const GRAPH_STREAM: u64 = 2;
const GAMMA_STREAM: u64 = 3;
const TRIAL_STREAM_BASE: u64 = 1_000;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Uniform random connected graph; the seed defaults to one derived from
    /// the master seed.
    Random {
        agents: usize,
        edges: usize,
        seed: Option<u64>,
    },
    Explicit {
        agents: usize,
        edges: Vec<(usize, usize)>,
    },
}

impl GraphSpec {
    pub fn agents(&self) -> usize {
        match self {
            GraphSpec::Random { agents, .. } | GraphSpec::Explicit { agents, .. } => *agents,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub family: CostFamily,
    pub dim: usize,
    pub samples: usize,
    pub reg_weight: f64,
    pub label_noise: f64,
    /// Number of cost changes over the horizon; zero for a static problem.
    pub switches: usize,
    /// Target distance between consecutive optima.
    pub drift_target: f64,
    /// Load local datasets from a CSV file instead of generating them.
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    /// Completion probability of regular agents.
    pub p_fast: f64,
    /// Completion probability of the first `slow_nodes` agents.
    pub p_slow: f64,
    pub slow_nodes: usize,
    /// Probability that a transmitted packet arrives.
    pub link_success: f64,
    /// Half-width of uniform noise added to each delivered packet coordinate.
    pub link_noise: f64,
    /// Half-width of uniform noise added to each computed local model.
    pub compute_noise: f64,
    /// Quantization step; zero disables quantization.
    pub quant_delta: f64,
    pub quant_max: f64,
    pub lossy_self_loops: bool,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec {
            p_fast: 1.0,
            p_slow: 0.5,
            slow_nodes: 0,
            link_success: 1.0,
            link_noise: 0.0,
            compute_noise: 0.0,
            quant_delta: 0.0,
            quant_max: 10.0,
            lossy_self_loops: false,
        }
    }
}

impl ChannelSpec {
    pub fn build(&self, topology: &Topology) -> Result<ChannelModel> {
        let n = topology.num_agents();
        if self.slow_nodes > n {
            return Err(Error::invalid(format!(
                "{} slow nodes requested for {n} agents",
                self.slow_nodes
            )));
        }
        let completion: Vec<f64> = (0..n)
            .map(|i| if i < self.slow_nodes { self.p_slow } else { self.p_fast })
            .collect();
        let quantizer = if self.quant_delta == 0.0 {
            None
        } else {
            Some(Quantizer::new(self.quant_delta, self.quant_max)?)
        };
        Ok(
            ChannelModel::from_agent_probabilities(topology, &completion, self.link_success, self.lossy_self_loops)?
                .with_link_noise(Noise::uniform(self.link_noise)?)
                .with_compute_noise(Noise::uniform(self.compute_noise)?)
                .with_quantizer(quantizer),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSpec {
    /// Record `‖z − T(z)‖` every tick (one extra exact prox round per tick).
    pub residual: bool,
    /// Evaluate the mean error bound and the distance to the fixed-point set.
    pub theory_bound: bool,
    /// Subregularity constant; estimated when absent.
    pub gamma: Option<f64>,
    pub gamma_samples: usize,
    pub gamma_radius: f64,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        MetricsSpec {
            residual: false,
            theory_bound: false,
            gamma: None,
            gamma_samples: 20,
            gamma_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub graph: GraphSpec,
    pub costs: CostSpec,
    pub algorithm: AlgorithmParams,
    pub channel: ChannelSpec,
    pub metrics: MetricsSpec,
    pub horizon: usize,
    pub trials: usize,
    pub master_seed: u64,
}

impl Scenario {
    /// Ten agents on twenty random edges, 16 features, 20 samples per agent,
    /// regularization 5, 1000 ticks and 20 trials.
    pub fn desk_logistic() -> Self {
        Scenario {
            name: "static-logistic".into(),
            graph: GraphSpec::Random {
                agents: 10,
                edges: 20,
                seed: None,
            },
            costs: CostSpec {
                family: CostFamily::Logistic,
                dim: 16,
                samples: 20,
                reg_weight: 5.0,
                label_noise: 1.0,
                switches: 0,
                drift_target: 2.5,
                dataset: None,
            },
            algorithm: AlgorithmParams {
                alpha: 0.5,
                rho: 10.0,
                prox: ProxConfig::new(1e-8),
            },
            channel: ChannelSpec::default(),
            metrics: MetricsSpec::default(),
            horizon: 1000,
            trials: 20,
            master_seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        self.algorithm.validate()?;
        if self.costs.dataset.is_some() && self.costs.switches > 0 {
            return Err(Error::invalid("switching costs need generated datasets"));
        }
        if self.metrics.theory_bound && self.costs.switches > 0 {
            return Err(Error::invalid("the theory bound is only evaluated for static costs"));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(stream);
        rng
    }

    fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        self.rng(TRIAL_STREAM_BASE + trial as u64)
    }
}

/// A scenario with its topology, cost stream, optima and channel built.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub scenario: Scenario,
    pub topology: Arc<Topology>,
    pub stream: CostStream,
    pub optima: Vec<DVector<f64>>,
    pub channel: ChannelModel,
    fixed_sets: Option<Vec<FixedPointSet>>,
}

impl PreparedScenario {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let topology = Arc::new(match &scenario.graph {
            GraphSpec::Random { agents, edges, seed } => {
                let seed = seed.unwrap_or_else(|| scenario.rng(GRAPH_STREAM).next_u64());
                Topology::random_connected(*agents, *edges, seed)?
            }
            GraphSpec::Explicit { agents, edges } => Topology::new(*agents, edges)?,
        });

        let spec = &scenario.costs;
        let (stream, optima) = match &spec.dataset {
            Some(path) => {
                let costs = load_dataset_csv(path, spec.family, spec.reg_weight)?;
                if costs.len() != topology.num_agents() {
                    return Err(Error::invalid(format!(
                        "dataset has {} agents but the graph has {}",
                        costs.len(),
                        topology.num_agents()
                    )));
                }
                let opt = centralized_minimizer(&costs)?;
                (CostStream::constant(costs)?.with_drift_bound(0.0), vec![opt])
            }
            None => {
                let builder = PiecewiseStreamBuilder {
                    generator: DatasetGenerator {
                        family: spec.family,
                        num_agents: topology.num_agents(),
                        dim: spec.dim,
                        samples: spec.samples,
                        reg_weight: spec.reg_weight,
                        label_noise: spec.label_noise,
                    },
                    switches: spec.switches,
                    horizon: scenario.horizon,
                    drift_target: spec.drift_target,
                };
                builder.build(&mut scenario.rng(DATA_STREAM))?
            }
        };

        let channel = scenario.channel.build(&topology)?;
        let fixed_sets = if scenario.metrics.theory_bound {
            Some(
                stream
                    .segments()
                    .iter()
                    .zip(&optima)
                    .map(|(seg, opt)| FixedPointSet::new(&topology, &seg.costs, opt, scenario.algorithm.rho))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        Ok(PreparedScenario {
            scenario,
            topology,
            stream,
            optima,
            channel,
            fixed_sets,
        })
    }

    /// Swaps algorithm, channel and metric settings while keeping the
    /// topology and data. Fails if `scenario` would need different data.
    pub fn reconfigure(&self, scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let same_data = scenario.graph == self.scenario.graph
            && scenario.costs == self.scenario.costs
            && scenario.master_seed == self.scenario.master_seed
            && (scenario.horizon == self.scenario.horizon || scenario.costs.switches == 0);
        if !same_data {
            return Err(Error::invalid("reconfigure cannot change the graph or the data"));
        }
        let fixed_sets = if !scenario.metrics.theory_bound {
            None
        } else if self.fixed_sets.is_some() && scenario.algorithm.rho == self.scenario.algorithm.rho {
            self.fixed_sets.clone()
        } else {
            Some(vec![FixedPointSet::new(
                &self.topology,
                &self.stream.segments()[0].costs,
                &self.optima[0],
                scenario.algorithm.rho,
            )?])
        };
        Ok(PreparedScenario {
            channel: scenario.channel.build(&self.topology)?,
            scenario,
            topology: Arc::clone(&self.topology),
            stream: self.stream.clone(),
            optima: self.optima.clone(),
            fixed_sets,
        })
    }

    fn probe(&self) -> MetricsProbe {
        let probe = MetricsProbe::new(self.optima.clone()).with_residual(self.scenario.metrics.residual);
        match &self.fixed_sets {
            Some(sets) => probe.with_fixed_sets(sets.clone()),
            None => probe,
        }
    }

    /// Mean perturbation bound in `z`-space: `α √ξ ν_e`.
    pub fn stacked_error_bound(&self) -> f64 {
        let s = &self.scenario;
        s.algorithm.alpha
            * (self.topology.num_edges() as f64).sqrt()
            * self.channel.error_mean_bound(s.algorithm.rho, self.stream.dim())
    }

    /// Estimates the subregularity constant of the exact operator around the
    /// fixed point closest to the initial state.
    pub fn estimate_gamma(&self) -> Result<GammaEstimate> {
        let sets = self.fixed_sets_or_build()?;
        let s = &self.scenario;
        let costs = &self.stream.segments()[0].costs;
        let op = ExactOperator::new(&self.topology, costs, s.algorithm.alpha, s.algorithm.rho)?;
        let z0 = DVector::zeros(self.topology.num_edges() * self.stream.dim());
        let z_star = sets[0].project(&z0)?;
        let mut est = estimate_gamma(
            &op,
            &z_star,
            s.metrics.gamma_samples,
            s.metrics.gamma_radius,
            &mut s.rng(GAMMA_STREAM),
        )?;
        // The trajectory from the actual initial state is the one the bound describes.
        let anchored = gamma_ratio_max(&op, &[z0])?;
        est.gamma = est.gamma.max(anchored.gamma);
        est.used += anchored.used;
        est.skipped += anchored.skipped;
        Ok(est)
    }

    fn fixed_sets_or_build(&self) -> Result<Vec<FixedPointSet>> {
        match &self.fixed_sets {
            Some(sets) => Ok(sets.clone()),
            None => Ok(vec![FixedPointSet::new(
                &self.topology,
                &self.stream.segments()[0].costs,
                &self.optima[0],
                self.scenario.algorithm.rho,
            )?]),
        }
    }

    /// Rate constants and the bound curve for `k = 0..=horizon`.
    pub fn theory(&self) -> Result<Theory> {
        let s = &self.scenario;
        let (gamma, estimate) = match s.metrics.gamma {
            Some(g) => (g, None),
            None => {
                let est = self.estimate_gamma()?;
                (est.gamma, Some(est))
            }
        };
        let nu = self.stacked_error_bound();
        let rate = compute_mu(s.algorithm.alpha, self.channel.p_min(), gamma)?
            .with_p_max(self.channel.p_max())?
            .with_noise(nu)
            .with_drift(self.stream.drift_bound().unwrap_or(0.0));
        let sets = self.fixed_sets_or_build()?;
        let z0 = DVector::zeros(self.topology.num_edges() * self.stream.dim());
        let initial_distance = sets[0].distance(&z0)?;
        let bound = mean_error_bound_curve(&rate, initial_distance, &[nu], s.horizon);
        Ok(Theory {
            rate,
            gamma_estimate: estimate,
            initial_distance,
            bound,
        })
    }

    /// Runs one trial without the theory bound filled in.
    pub fn run_trial(&self, trial: usize) -> Result<crate::engine::RunRecord> {
        let s = &self.scenario;
        let mut sys = AgentSystem::new(Arc::clone(&self.topology), self.stream.dim());
        run(
            &mut sys,
            &s.algorithm,
            &self.stream,
            &self.channel,
            s.horizon,
            &mut s.trial_rng(trial),
            &self.probe(),
        )
    }

    pub fn run(&self) -> Result<ScenarioResult> {
        let theory = if self.scenario.metrics.theory_bound {
            Some(self.theory()?)
        } else {
            None
        };
        let mut trials = (0..self.scenario.trials)
            .into_par_iter()
            .map(|t| self.run_trial(t))
            .collect::<Result<Vec<_>>>()?;
        if let Some(th) = &theory {
            for record in &mut trials {
                for tick in &mut record.ticks {
                    tick.theory_bound = Some(th.bound[tick.k]);
                }
            }
        }
        let mean = mean_curve(&trials);
        Ok(ScenarioResult {
            name: self.scenario.name.clone(),
            switch_times: self.stream.switch_times(),
            trials,
            mean,
            theory,
        })
    }
}

/// Theory-side constants of a static scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    pub rate: RateParameters,
    pub gamma_estimate: Option<GammaEstimate>,
    /// Distance from the zero initial state to the fixed-point set.
    pub initial_distance: f64,
    /// Mean bound on the fixed-point distance for `k = 0..=horizon`.
    pub bound: Vec<f64>,
}

impl Theory {
    /// Bound on the tracking error after tick `k`: local models at tick `k`
    /// come from `z(k − 1)` through a map with Lipschitz constant `‖D Aᵀ‖`.
    pub fn tracking_bound(&self, topology: &Topology, rho: f64, k: usize) -> f64 {
        topology.operators(1, rho).dat_norm() * self.bound[k.saturating_sub(1)]
    }
}

fn average<'a>(values: impl Iterator<Item = Option<f64>> + 'a) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v?;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

fn mean_curve(trials: &[crate::engine::RunRecord]) -> Vec<TickMetrics> {
    let horizon = trials[0].ticks.len();
    let n = trials.len() as f64;
    (0..horizon)
        .map(|t| {
            let at = |f: &dyn Fn(&TickMetrics) -> Option<f64>| average(trials.iter().map(|r| f(&r.ticks[t])));
            TickMetrics {
                k: trials[0].ticks[t].k,
                tracking_error: trials.iter().map(|r| r.ticks[t].tracking_error).sum::<f64>() / n,
                consensus_error: trials.iter().map(|r| r.ticks[t].consensus_error).sum::<f64>() / n,
                fixed_point_residual: at(&|m| m.fixed_point_residual),
                fixed_point_distance: at(&|m| m.fixed_point_distance),
                theory_bound: trials[0].ticks[t].theory_bound,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    pub trials: Vec<crate::engine::RunRecord>,
    /// Per-tick mean over trials.
    pub mean: Vec<TickMetrics>,
    pub theory: Option<Theory>,
    pub switch_times: Vec<usize>,
}

impl ScenarioResult {
    pub fn mean_tracking(&self) -> Vec<f64> {
        self.mean.iter().map(|m| m.tracking_error).collect()
    }

    pub fn final_error(&self) -> f64 {
        self.mean.last().map_or(f64::NAN, |m| m.tracking_error)
    }

    /// Mean tracking error over the final 10% of ticks.
    pub fn asymptotic_error(&self) -> f64 {
        tail_mean(&self.mean_tracking())
    }

    pub fn time_average_error(&self) -> f64 {
        let curve = self.mean_tracking();
        curve.iter().sum::<f64>() / curve.len() as f64
    }

    pub fn empirical_rate(&self) -> Option<RateFit> {
        empirical_rate(&self.mean_tracking())
    }

    pub fn mean_inner_iterations(&self) -> f64 {
        let (sum, count) = self
            .trials
            .iter()
            .fold((0, 0), |(s, c), r| (s + r.inner_iterations.0, c + r.inner_iterations.1));
        if count == 0 {
            0.0
        } else {
            sum as f64 / count as f64
        }
    }

    pub fn capped_updates(&self) -> usize {
        self.trials.iter().map(|r| r.capped_updates).sum()
    }

    /// Log-linear fit of the mean tracking error over each segment, from its
    /// first tick until the error is within a factor 10 of the segment minimum.
    pub fn segment_fits(&self) -> Vec<Option<RateFit>> {
        let curve = self.mean_tracking();
        let mut bounds: Vec<usize> = std::iter::once(0)
            .chain(self.switch_times.iter().map(|&s| s - 1))
            .collect();
        bounds.push(curve.len());
        bounds
            .windows(2)
            .map(|w| {
                let seg = &curve[w[0]..w[1]];
                let floor = seg.iter().copied().fold(f64::INFINITY, f64::min);
                let end = seg.iter().position(|&v| v <= 10.0 * floor).map_or(w[1], |o| w[0] + o);
                log_linear_fit(&curve, w[0]..end.max(w[0]))
            })
            .collect()
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioResult> {
    PreparedScenario::new(scenario.clone())?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Inner solver threshold.
    Theta,
    /// Quantization step.
    Delta,
    /// Number of slow agents.
    SlowNodes,
    /// Number of cost switches.
    Switches,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Theta => "theta",
            SweepAxis::Delta => "delta",
            SweepAxis::SlowNodes => "slow_nodes",
            SweepAxis::Switches => "switches",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => Ok(SweepAxis::Theta),
            "delta" => Ok(SweepAxis::Delta),
            "slow_nodes" => Ok(SweepAxis::SlowNodes),
            "switches" => Ok(SweepAxis::Switches),
            other => Err(Error::invalid(format!(
                "unknown sweep axis `{other}` (expected theta, delta, slow_nodes or switches)"
            ))),
        }
    }
}

impl SweepAxis {
    /// True when changing this knob changes the data.
    fn changes_data(self) -> bool {
        matches!(self, SweepAxis::Switches)
    }

    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = base.clone();
        let count = || {
            if value >= 0.0 && value.fract() == 0.0 && value.is_finite() {
                Ok(value as usize)
            } else {
                Err(Error::invalid(format!(
                    "{self} values must be non-negative integers, got {value}"
                )))
            }
        };
        match self {
            SweepAxis::Theta => s.algorithm.prox.threshold = value,
            SweepAxis::Delta => {
                if !(value >= 0.0) {
                    return Err(Error::invalid(format!("delta must be non-negative, got {value}")));
                }
                s.channel.quant_delta = value;
            }
            SweepAxis::SlowNodes => s.channel.slow_nodes = count()?,
            SweepAxis::Switches => s.costs.switches = count()?,
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub asymptotic_error: f64,
    pub mean_inner_iterations: f64,
    pub time_average_error: f64,
    pub rate: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub trials: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn asymptotic_errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.asymptotic_error).collect()
    }

    /// True when the asymptotic error strictly increases along the axis.
    pub fn is_strictly_increasing(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].asymptotic_error > w[0].asymptotic_error)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].asymptotic_error >= w[0].asymptotic_error)
    }
}

/// Runs `base` once per axis value, keeping topology and data fixed unless
/// the axis itself changes the data.
pub fn sweep(base: &Scenario, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::invalid("a sweep needs at least one value"));
    }
    let scenarios = values
        .iter()
        .map(|&v| axis.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let prepared_base = if axis.changes_data() {
        None
    } else {
        Some(PreparedScenario::new(base.clone())?)
    };
    let points = scenarios
        .into_iter()
        .zip(values)
        .map(|(s, &value)| {
            let prepared = match &prepared_base {
                Some(p) => p.reconfigure(s)?,
                None => PreparedScenario::new(s)?,
            };
            let result = prepared.run()?;
            Ok(SweepPoint {
                value,
                asymptotic_error: result.asymptotic_error(),
                mean_inner_iterations: result.mean_inner_iterations(),
                time_average_error: result.time_average_error(),
                rate: result.empirical_rate(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis,
        trials: base.trials,
        points,
    })
}

/// Asymptotic error and inner-iteration cost per solver threshold.
pub fn threshold_sweep(base: &Scenario, thresholds: &[f64]) -> Result<SweepResult> {
    sweep(base, SweepAxis::Theta, thresholds)
}

/// Asymptotic error per quantization step; zero disables quantization.
pub fn quantization_sweep(base: &Scenario, deltas: &[f64]) -> Result<SweepResult> {
    sweep(base, SweepAxis::Delta, deltas)
}

/// Empirical convergence rate per number of slow agents, which complete
/// their update with probability `p_slow` instead of `p_fast`.
pub fn asynchrony_experiment(base: &Scenario, slow_counts: &[usize], p_slow: f64, p_fast: f64) -> Result<SweepResult> {
    let mut base = base.clone();
    base.channel.p_slow = p_slow;
    base.channel.p_fast = p_fast;
    let values: Vec<f64> = slow_counts.iter().map(|&n| n as f64).collect();
    sweep(&base, SweepAxis::SlowNodes, &values)
}

/// Full results per number of cost switches over the same horizon.
pub fn online_experiment(base: &Scenario, switch_counts: &[usize]) -> Result<Vec<ScenarioResult>> {
    switch_counts
        .iter()
        .map(|&count| run_scenario(&SweepAxis::Switches.apply(base, count as f64)?))
        .collect()
}
