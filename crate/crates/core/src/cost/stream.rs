use nalgebra::DVector;

use super::LocalCost;
use crate::error::{Error, Result};

/// Costs of all agents, active from tick `start` until the next segment.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSegment {
    pub start: usize,
    pub costs: Vec<LocalCost>,
}

/// Piecewise-constant schedule of local costs shared by all agents.
///
/// The first segment starts at tick 0 and start ticks are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CostStream {
    segments: Vec<CostSegment>,
    drift_bound: Option<f64>,
}

impl CostStream {
    pub fn new(segments: Vec<CostSegment>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::invalid("cost stream needs a segment"))?;
        if first.start != 0 {
            return Err(Error::invalid("first cost segment must start at tick 0"));
        }
        let n = first.costs.len();
        if n == 0 {
            return Err(Error::invalid("cost segment has no agents"));
        }
        let dim = first.costs[0].dim();
        for pair in segments.windows(2) {
            if pair[1].start <= pair[0].start {
                return Err(Error::invalid("segment start ticks must be strictly increasing"));
            }
        }
        for seg in &segments {
            if seg.costs.len() != n || seg.costs.iter().any(|c| c.dim() != dim) {
                return Err(Error::invalid(
                    "all segments need one cost per agent with a common dimension",
                ));
            }
        }
        Ok(CostStream {
            segments,
            drift_bound: None,
        })
    }

    pub fn constant(costs: Vec<LocalCost>) -> Result<Self> {
        Self::new(vec![CostSegment { start: 0, costs }])
    }

    pub fn with_drift_bound(mut self, sigma: f64) -> Self {
        self.drift_bound = Some(sigma);
        self
    }

    /// Declared or measured bound on the distance between consecutive optima.
    pub fn drift_bound(&self) -> Option<f64> {
        self.drift_bound
    }

    pub fn num_agents(&self) -> usize {
        self.segments[0].costs.len()
    }

    pub fn dim(&self) -> usize {
        self.segments[0].costs[0].dim()
    }

    pub fn segments(&self) -> &[CostSegment] {
        &self.segments
    }

    pub fn is_static(&self) -> bool {
        self.segments.len() == 1
    }

    pub fn segment_index_at(&self, k: usize) -> usize {
        self.segments.partition_point(|s| s.start <= k) - 1
    }

    pub fn costs_at(&self, k: usize) -> &[LocalCost] {
        &self.segments[self.segment_index_at(k)].costs
    }

    /// Start ticks of every segment after the first.
    pub fn switch_times(&self) -> Vec<usize> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }

    /// Largest distance between consecutive segment optima.
    pub fn measure_drift(optima: &[DVector<f64>]) -> f64 {
        optima.windows(2).map(|w| (&w[1] - &w[0]).norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::LinearRegressionCost;
    use nalgebra::DMatrix;

    fn cost(v: f64) -> LocalCost {
        LinearRegressionCost::new(DMatrix::identity(1, 1), DVector::from_element(1, v))
            .unwrap()
            .into()
    }

    #[test]
    fn segment_lookup() {
        let stream = CostStream::new(vec![
            CostSegment {
                start: 0,
                costs: vec![cost(0.0)],
            },
            CostSegment {
                start: 5,
                costs: vec![cost(1.0)],
            },
            CostSegment {
                start: 9,
                costs: vec![cost(2.0)],
            },
        ])
        .unwrap();
        assert_eq!(stream.segment_index_at(1), 0);
        assert_eq!(stream.segment_index_at(4), 0);
        assert_eq!(stream.segment_index_at(5), 1);
        assert_eq!(stream.segment_index_at(100), 2);
        assert_eq!(stream.switch_times(), vec![5, 9]);
        assert!(!stream.is_static());
    }

    #[test]
    fn rejects_malformed_schedules() {
        assert!(CostStream::new(vec![]).is_err());
        assert!(CostStream::new(vec![CostSegment {
            start: 1,
            costs: vec![cost(0.0)]
        }])
        .is_err());
        assert!(CostStream::new(vec![
            CostSegment {
                start: 0,
                costs: vec![cost(0.0)]
            },
            CostSegment {
                start: 0,
                costs: vec![cost(1.0)]
            },
        ])
        .is_err());
        assert!(CostStream::new(vec![
            CostSegment {
                start: 0,
                costs: vec![cost(0.0)]
            },
            CostSegment {
                start: 3,
                costs: vec![cost(1.0), cost(2.0)]
            },
        ])
        .is_err());
    }

    #[test]
    fn drift_is_max_consecutive_distance() {
        let optima = vec![
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![3.0, 4.0]),
            DVector::from_vec(vec![3.0, 5.0]),
        ];
        assert_eq!(CostStream::measure_drift(&optima), 5.0);
        assert_eq!(CostStream::measure_drift(&optima[..1]), 0.0);
    }
}
