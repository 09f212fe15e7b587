//! Sensor models: detection probability, observation likelihood and
//! clutter process.

use nalgebra::DVector;

use crate::cardinality::ClutterModel;
use crate::gaussian::{
    kalman_update_log, ut_update_log, BearingObservationModel, GaussianComponent,
    LinearObservationModel, UnscentedParams,
};
use crate::Result;

/// Observation likelihood of a sensor.
#[derive(Debug, Clone)]
pub enum Observation {
    Linear(LinearObservationModel),
    Bearing(BearingObservationModel),
}

/// One sensor: constant detection probability over the state space, an
/// observation model and a clutter process.
#[derive(Debug, Clone)]
pub struct SensorModel {
    /// Detection probability, constant over the single-target state space.
    pub detection_prob: f64,
    pub observation: Observation,
    pub clutter: ClutterModel,
    /// Sigma-point parameters for the unscented update of bearing sensors;
    /// ignored by linear sensors.
    pub unscented: UnscentedParams,
}

impl SensorModel {
    pub fn new(detection_prob: f64, observation: Observation, clutter: ClutterModel) -> Self {
        debug_assert!((0.0..=1.0).contains(&detection_prob));
        Self { detection_prob, observation, clutter, unscented: UnscentedParams::default() }
    }

    pub fn miss_prob(&self) -> f64 {
        1.0 - self.detection_prob
    }

    /// Conditions a component on one measurement of this sensor, returning
    /// the updated component and the log marginal likelihood.
    pub fn update_component_log(
        &self,
        comp: &GaussianComponent,
        z: &DVector<f64>,
    ) -> Result<(GaussianComponent, f64)> {
        match &self.observation {
            Observation::Linear(model) => kalman_update_log(comp, model, z),
            Observation::Bearing(model) => ut_update_log(comp, model, z[0], &self.unscented),
        }
    }

    /// Log of the (uniform) clutter spatial density.
    pub fn log_clutter_density(&self) -> f64 {
        self.clutter.spatial.log_density()
    }
}
