use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{centralized_minimizer, CostSegment, CostStream, LinearRegressionCost, LocalCost, LogisticRegressionCost};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostFamily {
    Linear,
    Logistic,
}

impl fmt::Display for CostFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostFamily::Linear => "linear",
            CostFamily::Logistic => "logistic",
        })
    }
}

impl FromStr for CostFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(CostFamily::Linear),
            "logistic" => Ok(CostFamily::Logistic),
            other => Err(format!("unknown cost model `{other}` (expected linear or logistic)")),
        }
    }
}

/// Synthetic datasets with standard-normal features and a planted parameter.
///
/// Linear targets are `a·x̄ + noise`; logistic labels are `sign(a·x̄ + noise)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetGenerator {
    pub family: CostFamily,
    pub num_agents: usize,
    pub dim: usize,
    pub samples: usize,
    pub reg_weight: f64,
    pub label_noise: f64,
}

fn normal_vec<R: Rng>(rng: &mut R, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

impl DatasetGenerator {
    fn validate(&self) -> Result<()> {
        if self.num_agents == 0 || self.dim == 0 || self.samples == 0 {
            return Err(Error::invalid("datasets need at least one agent, feature and sample"));
        }
        if !(self.label_noise >= 0.0) {
            return Err(Error::invalid("label noise must be non-negative"));
        }
        Ok(())
    }

    pub fn features<R: Rng>(&self, rng: &mut R) -> Vec<DMatrix<f64>> {
        (0..self.num_agents)
            .map(|_| DMatrix::from_fn(self.samples, self.dim, |_, _| rng.sample(StandardNormal)))
            .collect()
    }

    pub fn sample_noise<R: Rng>(&self, rng: &mut R) -> Vec<DVector<f64>> {
        (0..self.num_agents).map(|_| normal_vec(rng, self.samples)).collect()
    }

    pub fn planted<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        normal_vec(rng, self.dim)
    }

    /// Local costs for fixed features and noise under the planted parameter.
    pub fn costs_for(
        &self,
        features: &[DMatrix<f64>],
        noise: &[DVector<f64>],
        planted: &DVector<f64>,
    ) -> Result<Vec<LocalCost>> {
        features
            .iter()
            .zip(noise)
            .map(|(a, xi)| {
                let signal = a * planted + xi * self.label_noise;
                Ok(match self.family {
                    CostFamily::Linear => {
                        LinearRegressionCost::with_regularization(a.clone(), signal, self.reg_weight)?.into()
                    }
                    CostFamily::Logistic => {
                        let labels = signal.map(|s| if s >= 0.0 { 1.0 } else { -1.0 });
                        LogisticRegressionCost::new(a.clone(), labels, self.reg_weight)?.into()
                    }
                })
            })
            .collect()
    }

    pub fn generate<R: Rng>(&self, rng: &mut R) -> Result<Vec<LocalCost>> {
        self.validate()?;
        let features = self.features(rng);
        let noise = self.sample_noise(rng);
        let planted = self.planted(rng);
        self.costs_for(&features, &noise, &planted)
    }
}

/// Builds piecewise-constant streams whose consecutive optima are about
/// `drift_target` apart.
///
/// Features and noise stay fixed; each switch rotates the planted parameter
/// towards a fresh random orthogonal direction, with the angle found by
/// bisection on the distance between the resulting optima. When even a
/// half-turn cannot reach the target the half-turn is used.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseStreamBuilder {
    pub generator: DatasetGenerator,
    pub switches: usize,
    pub horizon: usize,
    pub drift_target: f64,
}

impl PiecewiseStreamBuilder {
    /// Start tick of each segment for ticks `1..=horizon`.
    pub fn segment_starts(&self) -> Result<Vec<usize>> {
        let segments = self.switches + 1;
        if segments > self.horizon.max(1) {
            return Err(Error::invalid(format!(
                "{} switches do not fit in a horizon of {}",
                self.switches, self.horizon
            )));
        }
        Ok((0..segments)
            .map(|s| if s == 0 { 0 } else { 1 + s * self.horizon / segments })
            .collect())
    }

    /// Returns the stream and the centralized optimum of each segment.
    pub fn build<R: Rng>(&self, rng: &mut R) -> Result<(CostStream, Vec<DVector<f64>>)> {
        self.generator.validate()?;
        let starts = self.segment_starts()?;
        let gen = &self.generator;
        let features = gen.features(rng);
        let noise = gen.sample_noise(rng);
        let mut planted = gen.planted(rng);

        let first = gen.costs_for(&features, &noise, &planted)?;
        let mut optima = vec![centralized_minimizer(&first)?];
        let mut segments = vec![CostSegment { start: 0, costs: first }];

        for &start in &starts[1..] {
            let radius = planted.norm();
            let mut dir = normal_vec(rng, gen.dim);
            if radius > 0.0 {
                dir -= &planted * (dir.dot(&planted) / (radius * radius));
            }
            let dir = dir.normalize() * radius.max(1.0);
            let rotate = |angle: f64| &planted * angle.cos() + &dir * angle.sin();
            let prev = optima.last().expect("at least one segment").clone();
            let distance = |angle: f64| -> Result<(f64, Vec<LocalCost>, DVector<f64>)> {
                let costs = gen.costs_for(&features, &noise, &rotate(angle))?;
                let opt = centralized_minimizer(&costs)?;
                Ok(((&opt - &prev).norm(), costs, opt))
            };

            let mut best = distance(std::f64::consts::PI)?;
            let mut best_angle = std::f64::consts::PI;
            if best.0 > self.drift_target {
                let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    let candidate = distance(mid)?;
                    let overshoot = candidate.0 > self.drift_target;
                    if (candidate.0 - self.drift_target).abs() < (best.0 - self.drift_target).abs() {
                        best_angle = mid;
                        best = candidate;
                    }
                    if overshoot {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if (best.0 - self.drift_target).abs() < 1e-3 * self.drift_target {
                        break;
                    }
                }
            }
            planted = rotate(best_angle);
            let (_, costs, opt) = best;
            segments.push(CostSegment { start, costs });
            optima.push(opt);
        }

        let sigma = CostStream::measure_drift(&optima);
        Ok((CostStream::new(segments)?.with_drift_bound(sigma), optima))
    }
}

/// Reads `agent,sample,feature_1,...,feature_p,label` rows.
///
/// A first line that does not parse as numbers is treated as a header.
/// Agents must be numbered `0..n` and each needs at least one sample.
pub fn load_dataset_csv(path: &Path, family: CostFamily, reg_weight: f64) -> Result<Vec<LocalCost>> {
    let err = |message: String| Error::Dataset {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if rows.is_empty() && width.is_none() => {
                width = Some(fields.len());
                continue;
            }
            Err(_) => return Err(err(format!("line {}: non-numeric field", lineno + 1))),
        };
        if values.len() < 4 {
            return Err(err(format!(
                "line {}: need agent, sample, at least one feature and a label",
                lineno + 1
            )));
        }
        if *width.get_or_insert(values.len()) != values.len() {
            return Err(err(format!("line {}: inconsistent column count", lineno + 1)));
        }
        let agent = values[0];
        if agent < 0.0 || agent.fract() != 0.0 {
            return Err(err(format!(
                "line {}: agent index must be a non-negative integer",
                lineno + 1
            )));
        }
        let label = values[values.len() - 1];
        rows.push((agent as usize, values[2..values.len() - 1].to_vec(), label));
    }
    let n = rows
        .iter()
        .map(|r| r.0 + 1)
        .max()
        .ok_or_else(|| err("no data rows".into()))?;
    let dim = rows[0].1.len();

    (0..n)
        .map(|i| {
            let mine: Vec<&(usize, Vec<f64>, f64)> = rows.iter().filter(|r| r.0 == i).collect();
            if mine.is_empty() {
                return Err(err(format!("agent {i} has no samples")));
            }
            let a = DMatrix::from_fn(mine.len(), dim, |h, d| mine[h].1[d]);
            let b = DVector::from_fn(mine.len(), |h, _| mine[h].2);
            let cost: LocalCost = match family {
                CostFamily::Linear => LinearRegressionCost::with_regularization(a, b, reg_weight)
                    .map_err(|e| err(e.to_string()))?
                    .into(),
                CostFamily::Logistic => LogisticRegressionCost::new(a, b, reg_weight)
                    .map_err(|e| err(e.to_string()))?
                    .into(),
            };
            Ok(cost)
        })
        .collect()
}
