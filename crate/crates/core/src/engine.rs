//! DOT-ADMM iteration under Bernoulli activations, noise, quantization and
//! inexact local proximal updates.
//!
//! Agent `i` keeps its local model `x_i` and one auxiliary block `z_ij` per
//! neighbor. When sender `j` is active it computes
//! `x_j = prox_{f_j}^{1/(ρη_j)}((1/(ρη_j)) Σ_l z_jl)` and sends
//! `y_{j→i} = 2ρ x_j − z_ji`; a delivered packet relaxes
//! `z_ij ← (1 − α) z_ij + α y_{j→i}`.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;

use crate::analysis::{MetricsProbe, TickMetrics};
use crate::channel::ChannelModel;
use crate::cost::{CostStream, LocalCost, ProxConfig};
use crate::error::{check_dim, Error, Result};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmParams {
    /// Relaxation `α ∈ (0, 1)`.
    pub alpha: f64,
    /// Penalty `ρ > 0`.
    pub rho: f64,
    pub prox: ProxConfig,
}

impl AlgorithmParams {
    pub fn new(alpha: f64, rho: f64, prox: ProxConfig) -> Result<Self> {
        let params = AlgorithmParams { alpha, rho, prox };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid(format!("rho must be positive, got {}", self.rho)));
        }
        self.prox.validate()
    }
}

/// States of all agents: local models `x` (agent blocks) and auxiliary
/// variables `z` (edge blocks).
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSystem {
    topology: Arc<Topology>,
    dim: usize,
    x: DVector<f64>,
    z: DVector<f64>,
    k: usize,
}

impl AgentSystem {
    /// All-zero initial state.
    pub fn new(topology: Arc<Topology>, dim: usize) -> Self {
        let x = DVector::zeros(topology.num_agents() * dim);
        let z = DVector::zeros(topology.num_edges() * dim);
        AgentSystem {
            topology,
            dim,
            x,
            z,
            k: 0,
        }
    }

    pub fn with_auxiliary(topology: Arc<Topology>, dim: usize, z: DVector<f64>) -> Result<Self> {
        check_dim(topology.num_edges() * dim, z.len())?;
        let mut sys = Self::new(topology, dim);
        sys.z = z;
        Ok(sys)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stacked local models; inactive agents keep their last computed value.
    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn local_model(&self, i: usize) -> DVector<f64> {
        self.x.rows(i * self.dim, self.dim).into_owned()
    }

    /// Number of completed ticks.
    pub fn tick(&self) -> usize {
        self.k
    }

    /// `(1/(ρη_i)) Σ_{j ∈ N_i} z_ij`.
    fn prox_argument(&self, i: usize, rho: f64) -> DVector<f64> {
        let p = self.dim;
        let mut w = DVector::zeros(p);
        for e in self.topology.agent_edges(i) {
            w += self.z.rows(e * p, p);
        }
        w / (rho * self.topology.degree(i) as f64)
    }
}

/// What happened during one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub k: usize,
    /// Realized `β_ij` per directed edge.
    pub activations: Vec<bool>,
    /// `‖e_ij‖` per edge: the difference between the packet that was applied
    /// and the exact packet from the computed local model. Zero when inactive.
    pub error_norms: Vec<f64>,
    /// Inner prox iterations of each agent that computed this tick.
    pub inner_iterations: Vec<Option<usize>>,
    /// Local updates that hit the inner iteration cap.
    pub capped_updates: usize,
}

impl StepTrace {
    /// `‖α e‖` for the stacked error vector, i.e. the perturbation seen by `z`.
    pub fn stacked_error_norm(&self, alpha: f64) -> f64 {
        alpha * self.error_norms.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn active_edges(&self) -> usize {
        self.activations.iter().filter(|&&a| a).count()
    }

    pub fn total_inner_iterations(&self) -> (usize, usize) {
        self.inner_iterations
            .iter()
            .flatten()
            .fold((0, 0), |(sum, count), &it| (sum + it, count + 1))
    }
}

/// Draws `β_ij` for every directed edge, then performs the tick.
pub fn step<R: Rng>(
    sys: &mut AgentSystem,
    params: &AlgorithmParams,
    costs: &[LocalCost],
    channel: &ChannelModel,
    rng: &mut R,
) -> Result<StepTrace> {
    let activations: Vec<bool> = channel
        .activations()
        .iter()
        .map(|&p| p >= 1.0 || rng.random_bool(p))
        .collect();
    step_with_activations(sys, params, costs, channel, &activations, rng)
}

/// One tick with the edge activations given explicitly.
pub fn step_with_activations<R: Rng>(
    sys: &mut AgentSystem,
    params: &AlgorithmParams,
    costs: &[LocalCost],
    channel: &ChannelModel,
    activations: &[bool],
    rng: &mut R,
) -> Result<StepTrace> {
    let topo = Arc::clone(&sys.topology);
    let n = topo.num_agents();
    let p = sys.dim;
    check_dim(topo.num_edges(), activations.len())?;
    check_dim(topo.num_edges(), channel.activations().len())?;
    check_dim(n, costs.len())?;

    // A sender computes if any packet it sends (including to itself) lands.
    let sender_active: Vec<bool> = (0..n)
        .map(|j| topo.agent_edges(j).any(|e| activations[topo.reverse_edge(e)]))
        .collect();

    let mut inner_iterations = vec![None; n];
    let mut capped_updates = 0;
    // (clean local model, perturbed copy used in packets)
    let mut computed: Vec<Option<(DVector<f64>, DVector<f64>)>> = vec![None; n];
    for j in 0..n {
        if !sender_active[j] {
            continue;
        }
        let penalty = params.rho * topo.degree(j) as f64;
        let w = sys.prox_argument(j, params.rho);
        let out = costs[j].prox(&w, penalty, &params.prox)?;
        inner_iterations[j] = Some(out.iterations);
        if !out.converged {
            capped_updates += 1;
        }
        let mut noisy = out.x.clone();
        channel.compute_noise.add_to(rng, &mut noisy);
        computed[j] = Some((out.x, noisy));
    }

    let alpha = params.alpha;
    let two_rho = 2.0 * params.rho;
    let mut z_next = sys.z.clone();
    let mut error_norms = vec![0.0; topo.num_edges()];
    for e in 0..topo.num_edges() {
        if !activations[e] {
            continue;
        }
        let (_, j) = topo.edge(e);
        let (clean, noisy) = computed[j].as_ref().expect("sender of an active edge computed");
        let back = sys.z.rows(topo.reverse_edge(e) * p, p);
        let mut packet = noisy * two_rho - back;
        if channel.perturbs_edge(&topo, e) {
            if let Some(q) = &channel.quantizer {
                q.quantize_in_place(&mut packet);
            }
            channel.link_noise.add_to(rng, &mut packet);
        }
        error_norms[e] = (&packet - (clean * two_rho - back)).norm();
        let mut block = z_next.rows_mut(e * p, p);
        block *= 1.0 - alpha;
        block.axpy(alpha, &packet, 1.0);
    }

    for (j, c) in computed.into_iter().enumerate() {
        if let Some((clean, _)) = c {
            sys.x.rows_mut(j * p, p).copy_from(&clean);
        }
    }
    sys.z = z_next;
    sys.k += 1;

    Ok(StepTrace {
        k: sys.k,
        activations: activations.to_vec(),
        error_norms,
        inner_iterations,
        capped_updates,
    })
}

/// A map on edge-block vectors whose fixed points are of interest.
pub trait FixedPointMap {
    fn dim(&self) -> usize;
    fn apply(&self, z: &DVector<f64>) -> Result<DVector<f64>>;

    fn residual(&self, z: &DVector<f64>) -> Result<f64> {
        Ok((z - self.apply(z)?).norm())
    }
}

/// Synchronous, noise-free operator in compact form:
/// `T(z) = [(1 − α) I − α P] z + 2αρ P A prox(D Aᵀ z)`.
#[derive(Debug, Clone, Copy)]
pub struct ExactOperator<'a> {
    topology: &'a Topology,
    costs: &'a [LocalCost],
    alpha: f64,
    rho: f64,
    prox: ProxConfig,
}

impl<'a> ExactOperator<'a> {
    /// Uses a tight prox tolerance so the operator is effectively exact.
    pub fn new(topology: &'a Topology, costs: &'a [LocalCost], alpha: f64, rho: f64) -> Result<Self> {
        Self::with_prox(topology, costs, alpha, rho, ProxConfig::exact())
    }

    pub fn with_prox(
        topology: &'a Topology,
        costs: &'a [LocalCost],
        alpha: f64,
        rho: f64,
        prox: ProxConfig,
    ) -> Result<Self> {
        AlgorithmParams::new(alpha, rho, prox)?;
        check_dim(topology.num_agents(), costs.len())?;
        Ok(ExactOperator {
            topology,
            costs,
            alpha,
            rho,
            prox,
        })
    }

    pub fn topology(&self) -> &Topology {
        self.topology
    }

    pub fn block_dim(&self) -> usize {
        self.costs[0].dim()
    }

    /// `x = prox(D Aᵀ z)` applied block-wise.
    pub fn local_models(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.block_dim();
        let ops = self.topology.operators(p, self.rho);
        let w = ops.apply_d(&ops.apply_at(z)?)?;
        let mut x = DVector::zeros(w.len());
        for (i, cost) in self.costs.iter().enumerate() {
            let penalty = self.rho * self.topology.degree(i) as f64;
            let wi = w.rows(i * p, p).into_owned();
            x.rows_mut(i * p, p).copy_from(&cost.prox(&wi, penalty, &self.prox)?.x);
        }
        Ok(x)
    }
}

impl FixedPointMap for ExactOperator<'_> {
    fn dim(&self) -> usize {
        self.topology.num_edges() * self.block_dim()
    }

    fn apply(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let ops = self.topology.operators(self.block_dim(), self.rho);
        let x = self.local_models(z)?;
        let pz = ops.apply_p(z)?;
        let pax = ops.apply_p(&ops.apply_a(&x)?)?;
        Ok(z * (1.0 - self.alpha) - pz * self.alpha + pax * (2.0 * self.alpha * self.rho))
    }
}

/// Per-tick metrics of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub ticks: Vec<TickMetrics>,
    /// `‖α e_k‖` per tick.
    pub stacked_errors: Vec<f64>,
    /// Total inner prox iterations and number of local updates.
    pub inner_iterations: (usize, usize),
    pub capped_updates: usize,
}

impl RunRecord {
    pub fn mean_inner_iterations(&self) -> f64 {
        let (sum, count) = self.inner_iterations;
        if count == 0 {
            0.0
        } else {
            sum as f64 / count as f64
        }
    }

    pub fn tracking_errors(&self) -> Vec<f64> {
        self.ticks.iter().map(|t| t.tracking_error).collect()
    }
}

/// Runs `horizon` ticks, measuring after each one with `probe`.
pub fn run<R: Rng>(
    sys: &mut AgentSystem,
    params: &AlgorithmParams,
    stream: &CostStream,
    channel: &ChannelModel,
    horizon: usize,
    rng: &mut R,
    probe: &MetricsProbe,
) -> Result<RunRecord> {
    params.validate()?;
    check_dim(stream.num_agents(), sys.topology.num_agents())?;
    check_dim(stream.dim(), sys.dim)?;
    let mut record = RunRecord {
        ticks: Vec::with_capacity(horizon),
        stacked_errors: Vec::with_capacity(horizon),
        inner_iterations: (0, 0),
        capped_updates: 0,
    };
    for _ in 0..horizon {
        let k = sys.k + 1;
        let costs = stream.costs_at(k);
        let trace = step(sys, params, costs, channel, rng)?;
        let (sum, count) = trace.total_inner_iterations();
        record.inner_iterations.0 += sum;
        record.inner_iterations.1 += count;
        record.capped_updates += trace.capped_updates;
        record.stacked_errors.push(trace.stacked_error_norm(params.alpha));
        record.ticks.push(probe.measure(sys, stream, params)?);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Noise, Quantizer};
    use crate::cost::{CostFamily, DatasetGenerator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(family: CostFamily, n: usize, m: usize, dim: usize) -> (Arc<Topology>, Vec<LocalCost>) {
        let topo = Arc::new(Topology::random_connected(n, m, 3).unwrap());
        let gen = DatasetGenerator {
            family,
            num_agents: n,
            dim,
            samples: 8,
            reg_weight: 0.5,
            label_noise: 0.5,
        };
        let costs = gen.generate(&mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        (topo, costs)
    }

    fn random_z(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
        DVector::from_fn(len, |_, _| rng.random_range(-2.0..2.0))
    }

    #[test]
    fn engine_step_matches_compact_operator() {
        for family in [CostFamily::Linear, CostFamily::Logistic] {
            let (topo, costs) = setup(family, 5, 7, 3);
            let params = AlgorithmParams::new(0.4, 0.8, ProxConfig::new(1e-13)).unwrap();
            let op = ExactOperator::with_prox(&topo, &costs, params.alpha, params.rho, params.prox).unwrap();
            let channel = ChannelModel::reliable(&topo);
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            for _ in 0..5 {
                let z = random_z(&mut rng, topo.num_edges() * 3);
                let mut sys = AgentSystem::with_auxiliary(Arc::clone(&topo), 3, z.clone()).unwrap();
                step(&mut sys, &params, &costs, &channel, &mut rng).unwrap();
                assert!((sys.z() - op.apply(&z).unwrap()).norm() < 1e-12);
                assert!((sys.x() - op.local_models(&z).unwrap()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn no_activation_leaves_state_untouched() {
        let (topo, costs) = setup(CostFamily::Logistic, 4, 4, 2);
        let params = AlgorithmParams::new(0.5, 1.0, ProxConfig::default()).unwrap();
        let channel = ChannelModel::reliable(&topo).with_link_noise(Noise::uniform(0.1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = random_z(&mut rng, topo.num_edges() * 2);
        let mut sys = AgentSystem::with_auxiliary(Arc::clone(&topo), 2, z.clone()).unwrap();
        let trace = step_with_activations(
            &mut sys,
            &params,
            &costs,
            &channel,
            &vec![false; topo.num_edges()],
            &mut rng,
        )
        .unwrap();
        assert_eq!(sys.z(), &z);
        assert_eq!(sys.x(), &DVector::zeros(8));
        assert!(trace.inner_iterations.iter().all(Option::is_none));
        assert_eq!(trace.stacked_error_norm(0.5), 0.0);
    }

    #[test]
    fn single_edge_locality() {
        let (topo, costs) = setup(CostFamily::Linear, 5, 6, 2);
        let params = AlgorithmParams::new(0.5, 1.0, ProxConfig::default()).unwrap();
        let channel = ChannelModel::reliable(&topo);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = random_z(&mut rng, topo.num_edges() * 2);
        for flipped in 0..topo.num_edges() {
            let base: Vec<bool> = (0..topo.num_edges()).map(|e| e % 3 != 0).collect();
            let mut other = base.clone();
            other[flipped] = !other[flipped];
            let mut a = AgentSystem::with_auxiliary(Arc::clone(&topo), 2, z.clone()).unwrap();
            let mut b = a.clone();
            step_with_activations(&mut a, &params, &costs, &channel, &base, &mut rng).unwrap();
            step_with_activations(&mut b, &params, &costs, &channel, &other, &mut rng).unwrap();
            for e in 0..topo.num_edges() {
                let same = a.z().rows(e * 2, 2) == b.z().rows(e * 2, 2);
                assert_eq!(same, e != flipped, "edge {e}, flipped {flipped}");
            }
        }
    }

    #[test]
    fn zero_cost_fixed_points_and_averaging() {
        // Zero features: prox is the identity, so x_i is the mean of incoming z blocks.
        let topo = Arc::new(Topology::new(3, &[(0, 1), (1, 2)]).unwrap());
        let zero = crate::cost::LinearRegressionCost::new(nalgebra::DMatrix::zeros(1, 2), DVector::zeros(1)).unwrap();
        let costs: Vec<LocalCost> = vec![zero.into(); 3];
        let params = AlgorithmParams::new(0.5, 1.0, ProxConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = random_z(&mut rng, topo.num_edges() * 2);
        let mut sys = AgentSystem::with_auxiliary(Arc::clone(&topo), 2, z.clone()).unwrap();
        step(&mut sys, &params, &costs, &ChannelModel::reliable(&topo), &mut rng).unwrap();
        for i in 0..3 {
            let mut mean = DVector::zeros(2);
            for e in topo.agent_edges(i) {
                mean += z.rows(e * 2, 2);
            }
            mean /= topo.degree(i) as f64;
            assert!((sys.local_model(i) - mean).norm() < 1e-14);
        }

        let op = ExactOperator::new(&topo, &costs, 0.5, 1.0).unwrap();
        let start = random_z(&mut rng, topo.num_edges() * 2);
        let mut zk = start;
        for _ in 0..5000 {
            zk = op.apply(&zk).unwrap();
        }
        assert!(op.residual(&zk).unwrap() < 1e-10);
        let x = op.local_models(&zk).unwrap();
        for e in 0..topo.num_edges() {
            let (i, j) = topo.edge(e);
            let r = topo.reverse_edge(e);
            let lhs = zk.rows(e * 2, 2).into_owned();
            let rhs = x.rows(j * 2, 2) * 2.0 - zk.rows(r * 2, 2);
            assert!((lhs - rhs).norm() < 1e-9, "edge ({i},{j})");
        }
    }

    #[test]
    fn errors_without_channel_noise_are_compute_noise() {
        let (topo, costs) = setup(CostFamily::Linear, 4, 5, 3);
        let params = AlgorithmParams::new(0.5, 0.7, ProxConfig::default()).unwrap();
        let channel = ChannelModel::reliable(&topo).with_compute_noise(Noise::uniform(0.05).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut sys = AgentSystem::new(Arc::clone(&topo), 3);
        for _ in 0..3 {
            // Re-derive u_j from the realized packets: e_ij = 2ρ u_j for every edge sent by j.
            let trace = step(&mut sys, &params, &costs, &channel, &mut rng).unwrap();
            for j in 0..4 {
                let norms: Vec<f64> = topo
                    .agent_edges(j)
                    .map(|e| trace.error_norms[topo.reverse_edge(e)])
                    .collect();
                assert!(norms.iter().all(|&v| (v - norms[0]).abs() < 1e-12));
                assert!(norms[0] > 0.0 && norms[0] <= 2.0 * 0.7 * 0.05 * 3f64.sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn self_loops_bypass_quantizer_unless_lossy() {
        let (topo, costs) = setup(CostFamily::Linear, 3, 2, 2);
        let params = AlgorithmParams::new(0.5, 1.0, ProxConfig::default()).unwrap();
        let q = Quantizer::new(0.25, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = random_z(&mut rng, topo.num_edges() * 2);
        let exempt = ChannelModel::reliable(&topo).with_quantizer(Some(q));
        let mut sys = AgentSystem::with_auxiliary(Arc::clone(&topo), 2, z.clone()).unwrap();
        let trace = step(&mut sys, &params, &costs, &exempt, &mut rng).unwrap();
        for e in 0..topo.num_edges() {
            if topo.is_self_loop(e) {
                assert_eq!(trace.error_norms[e], 0.0);
            }
        }
        let lossy = exempt.with_lossy_self_loops(true);
        let mut sys = AgentSystem::with_auxiliary(Arc::clone(&topo), 2, z).unwrap();
        let trace = step(&mut sys, &params, &costs, &lossy, &mut rng).unwrap();
        assert!((0..topo.num_edges()).any(|e| topo.is_self_loop(e) && trace.error_norms[e] > 0.0));
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let (topo, costs) = setup(CostFamily::Linear, 3, 2, 2);
        let params = AlgorithmParams::new(0.5, 1.0, ProxConfig::default()).unwrap();
        let mut sys = AgentSystem::new(Arc::clone(&topo), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let channel = ChannelModel::reliable(&topo);
        assert!(step(&mut sys, &params, &costs[..2], &channel, &mut rng).is_err());
        assert!(AlgorithmParams::new(1.0, 1.0, ProxConfig::default()).is_err());
        assert!(AlgorithmParams::new(0.5, 0.0, ProxConfig::default()).is_err());
        assert!(AgentSystem::with_auxiliary(Arc::clone(&topo), 2, DVector::zeros(3)).is_err());
    }
}
