//! Stochastic channel: Bernoulli edge activations, additive noise and packet quantization.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::topology::Topology;

/// Floor quantizer with saturation at `±q_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    delta: f64,
    q_max: f64,
}

impl Quantizer {
    pub fn new(delta: f64, q_max: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) || !(q_max > 0.0 && q_max.is_finite()) {
            return Err(Error::invalid(format!(
                "quantizer needs delta > 0 and q_max > 0, got {delta}, {q_max}"
            )));
        }
        Ok(Quantizer { delta, q_max })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    /// `q̄` above the range, `q̲ = −q̄` below it, `δ ⌊v/δ⌋` inside.
    pub fn quantize_value(&self, v: f64) -> f64 {
        if v >= self.q_max {
            return self.q_max;
        }
        if v < -self.q_max {
            return -self.q_max;
        }
        let mut n = (v / self.delta).floor();
        // Keep n δ ≤ v < (n + 1) δ in floating point so grid points are fixed.
        if n * self.delta > v {
            n -= 1.0;
        } else if (n + 1.0) * self.delta <= v {
            n += 1.0;
        }
        (n * self.delta).clamp(-self.q_max, self.q_max)
    }

    pub fn quantize(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(|v| self.quantize_value(v))
    }

    pub fn quantize_in_place(&self, x: &mut DVector<f64>) {
        x.apply(|v| *v = self.quantize_value(*v));
    }
}

/// Additive noise model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Noise {
    #[default]
    Off,
    /// Zero-mean, uniform on the L∞ ball of the given radius.
    Uniform { radius: f64 },
}

impl Noise {
    pub fn uniform(radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!(
                "noise radius must be non-negative, got {radius}"
            )));
        }
        Ok(if radius == 0.0 {
            Noise::Off
        } else {
            Noise::Uniform { radius }
        })
    }

    pub fn is_off(&self) -> bool {
        matches!(self, Noise::Off)
    }

    pub fn add_to<R: Rng>(&self, rng: &mut R, out: &mut DVector<f64>) {
        if let Noise::Uniform { radius } = *self {
            out.apply(|v| *v += rng.random_range(-radius..=radius));
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, dim: usize) -> DVector<f64> {
        let mut out = DVector::zeros(dim);
        self.add_to(rng, &mut out);
        out
    }

    /// Upper bound on `E‖v‖` in dimension `dim` (via `E‖v‖ ≤ √E‖v‖²`).
    pub fn mean_norm_bound(&self, dim: usize) -> f64 {
        match *self {
            Noise::Off => 0.0,
            Noise::Uniform { radius } => radius * (dim as f64 / 3.0).sqrt(),
        }
    }
}

/// Per-directed-edge activation probabilities plus the perturbations applied
/// to delivered packets.
///
/// `activation[e]` for `e = (i, j)` is the probability that sender `j`
/// finished its update and the packet `j → i` arrived.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    activation: Vec<f64>,
    pub link_noise: Noise,
    pub compute_noise: Noise,
    pub quantizer: Option<Quantizer>,
    /// When false, self-loop packets bypass channel noise and quantization.
    pub lossy_self_loops: bool,
}

impl ChannelModel {
    pub fn new(activation: Vec<f64>) -> Result<Self> {
        if activation.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::invalid("activation probabilities must lie in (0, 1]"));
        }
        Ok(ChannelModel {
            activation,
            link_noise: Noise::Off,
            compute_noise: Noise::Off,
            quantizer: None,
            lossy_self_loops: false,
        })
    }

    /// Synchronous, lossless and noise-free.
    pub fn reliable(topology: &Topology) -> Self {
        ChannelModel::new(vec![1.0; topology.num_edges()]).expect("unit probabilities are valid")
    }

    /// `p_ij = completion[j] · link_success`, except that self-loops skip the
    /// link factor unless `lossy_self_loops` is set.
    pub fn from_agent_probabilities(
        topology: &Topology,
        completion: &[f64],
        link_success: f64,
        lossy_self_loops: bool,
    ) -> Result<Self> {
        if completion.len() != topology.num_agents() {
            return Err(Error::DimensionMismatch {
                expected: topology.num_agents(),
                found: completion.len(),
            });
        }
        let activation = topology
            .edges()
            .iter()
            .map(|&(i, j)| {
                let link = if i == j && !lossy_self_loops { 1.0 } else { link_success };
                completion[j] * link
            })
            .collect();
        let mut model = ChannelModel::new(activation)?;
        model.lossy_self_loops = lossy_self_loops;
        Ok(model)
    }

    pub fn with_link_noise(mut self, noise: Noise) -> Self {
        self.link_noise = noise;
        self
    }

    pub fn with_compute_noise(mut self, noise: Noise) -> Self {
        self.compute_noise = noise;
        self
    }

    pub fn with_quantizer(mut self, quantizer: Option<Quantizer>) -> Self {
        self.quantizer = quantizer;
        self
    }

    pub fn with_lossy_self_loops(mut self, lossy: bool) -> Self {
        self.lossy_self_loops = lossy;
        self
    }

    pub fn activation(&self, e: usize) -> f64 {
        self.activation[e]
    }

    pub fn activations(&self) -> &[f64] {
        &self.activation
    }

    pub fn p_min(&self) -> f64 {
        self.activation.iter().copied().fold(1.0, f64::min)
    }

    pub fn p_max(&self) -> f64 {
        self.activation.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_synchronous(&self) -> bool {
        self.activation.iter().all(|&p| p == 1.0)
    }

    /// True when a packet on this edge goes through the channel perturbations.
    pub fn perturbs_edge(&self, topology: &Topology, e: usize) -> bool {
        self.lossy_self_loops || !topology.is_self_loop(e)
    }

    /// Bound `ν_e` on `E‖e_ij‖`: link noise, scaled compute noise and, when
    /// quantizing, the worst in-range rounding error `δ √p`.
    pub fn error_mean_bound(&self, rho: f64, dim: usize) -> f64 {
        let quant = self.quantizer.map_or(0.0, |q| q.delta() * (dim as f64).sqrt());
        self.link_noise.mean_norm_bound(dim) + 2.0 * rho * self.compute_noise.mean_norm_bound(dim) + quant
    }
}
