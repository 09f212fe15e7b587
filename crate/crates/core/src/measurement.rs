//! Per-sensor measurement sets for one time step.

use nalgebra::DVector;

use crate::partition::MeasurementIndex;

/// The finite measurement sets collected by every sensor at one time step.
/// Bearing measurements are stored as one-dimensional vectors.
#[derive(Debug, Clone, Default)]
pub struct MeasurementFrame {
    pub per_sensor: Vec<Vec<DVector<f64>>>,
}

impl MeasurementFrame {
    pub fn new(per_sensor: Vec<Vec<DVector<f64>>>) -> Self {
        Self { per_sensor }
    }

    /// A frame with `sensors` empty measurement sets.
    pub fn empty(sensors: usize) -> Self {
        Self { per_sensor: vec![Vec::new(); sensors] }
    }

    pub fn sensor_count(&self) -> usize {
        self.per_sensor.len()
    }

    /// Measurement counts per sensor (the `m_j`).
    pub fn sizes(&self) -> Vec<usize> {
        self.per_sensor.iter().map(|m| m.len()).collect()
    }

    pub fn total_measurements(&self) -> usize {
        self.per_sensor.iter().map(|m| m.len()).sum()
    }

    pub fn measurement(&self, idx: &MeasurementIndex) -> &DVector<f64> {
        &self.per_sensor[idx.sensor][idx.index]
    }

    /// Number of measurement subsets supported by this frame, i.e. the
    /// product of `m_j + 1` over sensors. Saturates instead of overflowing.
    pub fn subset_count(&self) -> usize {
        self.per_sensor
            .iter()
            .fold(1usize, |acc, m| acc.saturating_mul(m.len() + 1))
    }
}
