//! Scenario simulation: ground-truth trajectories, detections and clutter.
//!
//! Scenarios are plain data (serializable to JSON) describing the region,
//! the target schedule, the motion model, the sensors and the birth model
//! used by the filters. Generation is fully seeded: the root seed is mixed
//! with fixed purpose tags and entity indices into independent substreams,
//! so regenerating with more sensors does not perturb the target noise.

use nalgebra::{DMatrix, DVector, Vector2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cardinality::{CardinalityDistribution, ClutterModel};
use crate::filters::BirthModel;
use crate::gaussian::{
    wrap_deg_360, BearingObservationModel, GaussianComponent, GaussianMixture,
    LinearObservationModel, MotionModel,
};
use crate::measurement::MeasurementFrame;
use crate::sensor::{Observation, SensorModel};

const TAG_TRACKS: u64 = 1;
const TAG_DETECTION: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_CLUTTER: u64 = 4;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Mixes a seed with a list of tags into one substream seed.
pub fn mix_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &t in tags {
        h = splitmix64(h ^ splitmix64(t));
    }
    h
}

fn rng_for(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, tags))
}

/// Axis-aligned monitored region.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Region {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Region {
    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min[0] && x <= self.max[0] && y >= self.min[1] && y <= self.max[1]
    }

    fn sample_point(&self, rng: &mut impl Rng) -> [f64; 2] {
        [
            rng.gen_range(self.min[0]..self.max[0]),
            rng.gen_range(self.min[1]..self.max[1]),
        ]
    }
}

/// One scheduled target: alive for steps `birth_step..=death_step`
/// (1-based, inclusive), starting from `initial_state`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetSpec {
    pub birth_step: usize,
    pub death_step: usize,
    pub initial_state: Vec<f64>,
}

/// Motion model parameters of the scenario.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotionSpec {
    /// Nearly-constant-velocity on `[x, y, vx, vy]`.
    Ncv { dt: f64, sigma: f64 },
    /// Random walk on `[x, y]`.
    RandomWalk { sigma: f64 },
}

impl MotionSpec {
    pub fn build(&self) -> MotionModel {
        match self {
            MotionSpec::Ncv { dt, sigma } => MotionModel::nearly_constant_velocity(*dt, *sigma),
            MotionSpec::RandomWalk { sigma } => MotionModel::random_walk(2, *sigma),
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            MotionSpec::Ncv { .. } => 4,
            MotionSpec::RandomWalk { .. } => 2,
        }
    }
}

/// One sensor of the scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorSpec {
    /// Observes the planar position with independent Gaussian noise;
    /// Poisson clutter uniform over the region.
    LinearPosition {
        noise_std: [f64; 2],
        detection_prob: f64,
        clutter_rate: f64,
    },
    /// Observes the bearing from a fixed position in degrees; Poisson
    /// clutter uniform over `[0, 360)`.
    Bearing {
        position: [f64; 2],
        noise_std_deg: f64,
        detection_prob: f64,
        clutter_rate: f64,
    },
}

impl SensorSpec {
    pub fn detection_prob(&self) -> f64 {
        match self {
            SensorSpec::LinearPosition { detection_prob, .. } => *detection_prob,
            SensorSpec::Bearing { detection_prob, .. } => *detection_prob,
        }
    }

    pub fn set_detection_prob(&mut self, p: f64) {
        match self {
            SensorSpec::LinearPosition { detection_prob, .. } => *detection_prob = p,
            SensorSpec::Bearing { detection_prob, .. } => *detection_prob = p,
        }
    }

    pub fn set_clutter_rate(&mut self, rate: f64) {
        match self {
            SensorSpec::LinearPosition { clutter_rate, .. } => *clutter_rate = rate,
            SensorSpec::Bearing { clutter_rate, .. } => *clutter_rate = rate,
        }
    }

    pub fn build(&self, region: &Region, state_dim: usize) -> SensorModel {
        match self {
            SensorSpec::LinearPosition { noise_std, detection_prob, clutter_rate } => {
                SensorModel::new(
                    *detection_prob,
                    Observation::Linear(LinearObservationModel::position_sensor(
                        state_dim, *noise_std,
                    )),
                    ClutterModel::poisson_rect(*clutter_rate, region.area()),
                )
            }
            SensorSpec::Bearing { position, noise_std_deg, detection_prob, clutter_rate } => {
                SensorModel::new(
                    *detection_prob,
                    Observation::Bearing(BearingObservationModel::new(
                        Vector2::new(position[0], position[1]),
                        *noise_std_deg,
                    )),
                    ClutterModel::poisson_bearing(*clutter_rate),
                )
            }
        }
    }
}

/// Birth intensity component: weight, mean and diagonal covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BirthComponentSpec {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov_diag: Vec<f64>,
}

/// Birth model of the scenario: Gaussian-mixture intensity plus Poisson
/// birth-count mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BirthSpec {
    pub components: Vec<BirthComponentSpec>,
    pub poisson_mean: f64,
}

impl BirthSpec {
    pub fn build(&self, n_max: usize) -> BirthModel {
        let components = self
            .components
            .iter()
            .map(|c| {
                GaussianComponent::new(
                    c.weight,
                    DVector::from_vec(c.mean.clone()),
                    DMatrix::from_diagonal(&DVector::from_vec(c.cov_diag.clone())),
                )
            })
            .collect();
        BirthModel::new(
            GaussianMixture::from_components(components),
            CardinalityDistribution::truncated_poisson(self.poisson_mean, n_max),
        )
    }
}

/// A complete simulation scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub duration: usize,
    pub region: Region,
    pub targets: Vec<TargetSpec>,
    pub motion: MotionSpec,
    pub sensors: Vec<SensorSpec>,
    pub birth: BirthSpec,
    pub seed: u64,
    /// Optional processing order of the sensors (e.g. to move a variable
    /// sensor to the front or back); identity when absent.
    #[serde(default)]
    pub sensor_permutation: Option<Vec<usize>>,
    /// Index of the sensor targeted by detection-probability sweeps;
    /// defaults to the last sensor.
    #[serde(default)]
    pub variable_sensor: Option<usize>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), String> {
        if self.duration == 0 {
            return Err("duration must be positive".into());
        }
        if self.region.area() <= 0.0 {
            return Err("region has nonpositive area".into());
        }
        let dim = self.motion.state_dim();
        for (i, t) in self.targets.iter().enumerate() {
            if t.initial_state.len() != dim {
                return Err(format!(
                    "target {i} has state dimension {}, motion model expects {dim}",
                    t.initial_state.len()
                ));
            }
            if t.birth_step == 0 || t.birth_step >= t.death_step || t.death_step > self.duration {
                return Err(format!(
                    "target {i} schedule [{}, {}] invalid for duration {}",
                    t.birth_step, t.death_step, self.duration
                ));
            }
            if !self.region.contains(t.initial_state[0], t.initial_state[1]) {
                return Err(format!("target {i} starts outside the region"));
            }
        }
        for (j, s) in self.sensors.iter().enumerate() {
            let p = s.detection_prob();
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("sensor {j} detection probability {p} out of range"));
            }
        }
        if let Some(perm) = &self.sensor_permutation {
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != (0..self.sensors.len()).collect::<Vec<_>>() {
                return Err("sensor_permutation is not a permutation of the sensors".into());
            }
        }
        if let Some(v) = self.variable_sensor {
            if v >= self.sensors.len() {
                return Err(format!("variable_sensor {v} out of range"));
            }
        }
        let birth_mass: f64 = self.birth.components.iter().map(|c| c.weight).sum();
        if (birth_mass - self.birth.poisson_mean).abs() > 1e-6 {
            return Err(format!(
                "birth intensity mass {birth_mass} disagrees with birth cardinality mean {}",
                self.birth.poisson_mean
            ));
        }
        for (i, c) in self.birth.components.iter().enumerate() {
            let dim = self.motion.state_dim();
            if c.mean.len() != dim || c.cov_diag.len() != dim {
                return Err(format!("birth component {i} dimension mismatch"));
            }
        }
        Ok(())
    }

    /// Sensors in processing order.
    pub fn ordered_sensors(&self) -> Vec<SensorSpec> {
        match &self.sensor_permutation {
            Some(perm) => perm.iter().map(|&j| self.sensors[j].clone()).collect(),
            None => self.sensors.clone(),
        }
    }

    pub fn build_sensor_models(&self) -> Vec<SensorModel> {
        let dim = self.motion.state_dim();
        self.ordered_sensors()
            .iter()
            .map(|s| s.build(&self.region, dim))
            .collect()
    }
}

/// Ground-truth track of one target; `states[k]` is its state at step
/// `birth_step + k`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub birth_step: usize,
    pub death_step: usize,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn alive_at(&self, step: usize) -> bool {
        step >= self.birth_step && step <= self.death_step
    }

    pub fn state_at(&self, step: usize) -> Option<&DVector<f64>> {
        self.alive_at(step).then(|| &self.states[step - self.birth_step])
    }

    pub fn position_at(&self, step: usize) -> Option<Vector2<f64>> {
        self.state_at(step).map(|s| Vector2::new(s[0], s[1]))
    }
}

fn sample_noise(rng: &mut impl Rng, cov: &DMatrix<f64>) -> DVector<f64> {
    let dim = cov.nrows();
    if cov.iter().all(|&v| v == 0.0) {
        return DVector::zeros(dim);
    }
    // Tiny jitter keeps the factorization alive for PSD-but-singular Q.
    let jitter = DMatrix::identity(dim, dim) * (1e-12 * cov.diagonal().max());
    let chol = nalgebra::Cholesky::new(cov.clone() + jitter)
        .expect("process noise covariance not PSD");
    let std: DVector<f64> =
        DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    chol.l() * std
}

/// Simulates every target track of the scenario. Targets propagate
/// through the motion model with sampled process noise; positions are
/// clamped to the region with the offending velocity component zeroed.
pub fn simulate_tracks(scenario: &Scenario) -> Vec<Trajectory> {
    let model = scenario.motion.build();
    scenario
        .targets
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let mut rng = rng_for(scenario.seed, &[TAG_TRACKS, i as u64]);
            let mut states = Vec::with_capacity(spec.death_step - spec.birth_step + 1);
            let mut state = DVector::from_vec(spec.initial_state.clone());
            states.push(state.clone());
            for _ in spec.birth_step..spec.death_step {
                state = &model.transition * &state + sample_noise(&mut rng, &model.process_noise);
                clamp_to_region(&mut state, &scenario.region);
                states.push(state.clone());
            }
            Trajectory { birth_step: spec.birth_step, death_step: spec.death_step, states }
        })
        .collect()
}

fn clamp_to_region(state: &mut DVector<f64>, region: &Region) {
    for axis in 0..2 {
        if state[axis] < region.min[axis] {
            state[axis] = region.min[axis];
            if state.len() >= 4 {
                state[axis + 2] = 0.0;
            }
        } else if state[axis] > region.max[axis] {
            state[axis] = region.max[axis];
            if state.len() >= 4 {
                state[axis + 2] = 0.0;
            }
        }
    }
}

/// Generates the measurement frames of every time step for the scenario's
/// sensors (in processing order), with detections, measurement noise and
/// clutter all drawn from substreams of `seed`.
pub fn generate_measurements(
    scenario: &Scenario,
    trajectories: &[Trajectory],
    seed: u64,
) -> Vec<MeasurementFrame> {
    let sensors = scenario.ordered_sensors();
    (1..=scenario.duration)
        .map(|step| {
            let per_sensor = sensors
                .iter()
                .enumerate()
                .map(|(j, spec)| sensor_frame(scenario, spec, j, trajectories, step, seed))
                .collect();
            MeasurementFrame::new(per_sensor)
        })
        .collect()
}

fn sensor_frame(
    scenario: &Scenario,
    spec: &SensorSpec,
    sensor_idx: usize,
    trajectories: &[Trajectory],
    step: usize,
    seed: u64,
) -> Vec<DVector<f64>> {
    let ju = sensor_idx as u64;
    let su = step as u64;
    let mut detect_rng = rng_for(seed, &[TAG_DETECTION, ju, su]);
    let mut noise_rng = rng_for(seed, &[TAG_NOISE, ju, su]);
    let mut clutter_rng = rng_for(seed, &[TAG_CLUTTER, ju, su]);

    let mut out = Vec::new();
    for traj in trajectories {
        let Some(state) = traj.state_at(step) else { continue };
        if !detect_rng.gen_bool(spec.detection_prob()) {
            continue;
        }
        match spec {
            SensorSpec::LinearPosition { noise_std, .. } => {
                let nx: f64 = noise_rng.sample(StandardNormal);
                let ny: f64 = noise_rng.sample(StandardNormal);
                out.push(DVector::from_vec(vec![
                    state[0] + noise_std[0] * nx,
                    state[1] + noise_std[1] * ny,
                ]));
            }
            SensorSpec::Bearing { position, noise_std_deg, .. } => {
                let dy = state[1] - position[1];
                let dx = state[0] - position[0];
                let angle = if dx == 0.0 && dy == 0.0 {
                    log::warn!("target coincides with sensor {sensor_idx}; emitting bearing 0");
                    0.0
                } else {
                    dy.atan2(dx).to_degrees()
                };
                let w: f64 = noise_rng.sample(StandardNormal);
                out.push(DVector::from_vec(vec![wrap_deg_360(angle + noise_std_deg * w)]));
            }
        }
    }

    let rate = match spec {
        SensorSpec::LinearPosition { clutter_rate, .. } => *clutter_rate,
        SensorSpec::Bearing { clutter_rate, .. } => *clutter_rate,
    };
    if rate > 0.0 {
        let count = Poisson::new(rate).expect("positive rate").sample(&mut clutter_rng) as usize;
        for _ in 0..count {
            match spec {
                SensorSpec::LinearPosition { .. } => {
                    let p = scenario.region.sample_point(&mut clutter_rng);
                    out.push(DVector::from_vec(vec![p[0], p[1]]));
                }
                SensorSpec::Bearing { .. } => {
                    out.push(DVector::from_vec(vec![clutter_rng.gen_range(0.0..360.0)]));
                }
            }
        }
    }
    out
}

/// [`generate_measurements`] restricted to scenarios with position
/// sensors only.
pub fn generate_linear_measurements(
    scenario: &Scenario,
    trajectories: &[Trajectory],
    seed: u64,
) -> Vec<MeasurementFrame> {
    debug_assert!(scenario
        .sensors
        .iter()
        .all(|s| matches!(s, SensorSpec::LinearPosition { .. })));
    generate_measurements(scenario, trajectories, seed)
}

/// [`generate_measurements`] restricted to scenarios with bearing sensors
/// only.
pub fn generate_bearing_measurements(
    scenario: &Scenario,
    trajectories: &[Trajectory],
    seed: u64,
) -> Vec<MeasurementFrame> {
    debug_assert!(scenario.sensors.iter().all(|s| matches!(s, SensorSpec::Bearing { .. })));
    generate_measurements(scenario, trajectories, seed)
}

/// The bundled position-sensor demo scenario: eight targets branching
/// from the four corner birth sites of a 2000 m square over 100 steps,
/// six position sensors (five at detection probability 0.5 plus one
/// variable), Poisson clutter of rate 10 per sensor.
pub fn linear_demo_scenario() -> Scenario {
    // Velocities chosen so the nominal paths crisscross the region while
    // staying well separated at every common time step.
    let targets = vec![
        (1, 100, [-400.0, -400.0, 12.0, 3.0]),
        (1, 100, [400.0, 400.0, -7.0, -8.0]),
        (21, 100, [-400.0, 400.0, 6.0, -5.0]),
        (21, 100, [400.0, -400.0, -4.0, 11.0]),
        (41, 100, [-400.0, -400.0, 1.0, 13.0]),
        (41, 100, [400.0, 400.0, -2.0, -12.0]),
        (61, 80, [-400.0, 400.0, 13.0, -3.0]),
        (61, 80, [400.0, -400.0, -12.0, 4.0]),
    ]
    .into_iter()
    .map(|(birth_step, death_step, s)| TargetSpec {
        birth_step,
        death_step,
        initial_state: s.to_vec(),
    })
    .collect();

    let sensor = SensorSpec::LinearPosition {
        noise_std: [10.0, 10.0],
        detection_prob: 0.5,
        clutter_rate: 10.0,
    };
    let mut sensors = vec![sensor; 6];
    // The last sensor is the one swept in detection probability.
    sensors[5].set_detection_prob(0.5);

    let birth = BirthSpec {
        components: [[-400.0, -400.0], [-400.0, 400.0], [400.0, -400.0], [400.0, 400.0]]
            .iter()
            .map(|p| BirthComponentSpec {
                weight: 0.1,
                mean: vec![p[0], p[1], 0.0, 0.0],
                cov_diag: vec![100.0, 100.0, 25.0, 25.0],
            })
            .collect(),
        poisson_mean: 0.4,
    };

    Scenario {
        duration: 100,
        region: Region { min: [-1000.0, -1000.0], max: [1000.0, 1000.0] },
        targets,
        motion: MotionSpec::Ncv { dt: 1.0, sigma: 0.25 },
        sensors,
        birth,
        seed: 20140401,
        sensor_permutation: None,
        variable_sensor: Some(5),
    }
}

/// The bundled bearings-only demo scenario: two slowly drifting targets in
/// a kilometre-scale region watched by five fixed angle-only sensors, with
/// birth components at the initial target locations.
pub fn bearing_demo_scenario() -> Scenario {
    let targets = vec![
        TargetSpec { birth_step: 1, death_step: 40, initial_state: vec![2.0, 4.0] },
        TargetSpec { birth_step: 1, death_step: 40, initial_state: vec![6.0, 5.0] },
    ];
    let sensor_positions =
        [[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0], [5.0, -2.0]];
    let sensors = sensor_positions
        .iter()
        .map(|p| SensorSpec::Bearing {
            position: *p,
            noise_std_deg: 2.0,
            detection_prob: 0.9,
            clutter_rate: 5.0,
        })
        .collect();
    let birth = BirthSpec {
        components: vec![
            BirthComponentSpec { weight: 0.1, mean: vec![2.0, 4.0], cov_diag: vec![0.65, 0.79] },
            BirthComponentSpec { weight: 0.1, mean: vec![6.0, 5.0], cov_diag: vec![0.65, 0.79] },
        ],
        poisson_mean: 0.2,
    };
    Scenario {
        duration: 40,
        region: Region { min: [-2.0, -4.0], max: [12.0, 12.0] },
        targets,
        motion: MotionSpec::RandomWalk { sigma: 0.24 },
        sensors,
        birth,
        seed: 20140402,
        sensor_permutation: None,
        variable_sensor: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_scenarios_validate() {
        linear_demo_scenario().validate().unwrap();
        bearing_demo_scenario().validate().unwrap();
    }

    #[test]
    fn straight_lines_without_noise() {
        let mut scenario = linear_demo_scenario();
        scenario.motion = MotionSpec::Ncv { dt: 1.0, sigma: 0.0 };
        let tracks = simulate_tracks(&scenario);
        let t = &tracks[0];
        let s0 = &t.states[0];
        let s5 = &t.states[5];
        assert!((s5[0] - (s0[0] + 5.0 * s0[2])).abs() < 1e-9);
        assert!((s5[1] - (s0[1] + 5.0 * s0[3])).abs() < 1e-9);
    }

    #[test]
    fn target_schedule_cardinality_profile() {
        let scenario = linear_demo_scenario();
        let tracks = simulate_tracks(&scenario);
        let count_at = |k: usize| tracks.iter().filter(|t| t.alive_at(k)).count();
        assert_eq!(count_at(1), 2);
        assert_eq!(count_at(20), 2);
        assert_eq!(count_at(21), 4);
        assert_eq!(count_at(41), 6);
        assert_eq!(count_at(61), 8);
        assert_eq!(count_at(80), 8);
        assert_eq!(count_at(81), 6);
        assert_eq!(count_at(100), 6);
    }

    #[test]
    fn tracks_deterministic_given_seed() {
        let scenario = linear_demo_scenario();
        let a = simulate_tracks(&scenario);
        let b = simulate_tracks(&scenario);
        for (ta, tb) in a.iter().zip(&b) {
            for (sa, sb) in ta.states.iter().zip(&tb.states) {
                assert_eq!(sa, sb);
            }
        }
        let fa = generate_measurements(&scenario, &a, 7);
        let fb = generate_measurements(&scenario, &b, 7);
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(x.sizes(), y.sizes());
            for (ms, ns) in x.per_sensor.iter().zip(&y.per_sensor) {
                for (m, n) in ms.iter().zip(ns) {
                    assert_eq!(m, n);
                }
            }
        }
    }

    #[test]
    fn tracks_stay_inside_region() {
        let scenario = linear_demo_scenario();
        for t in simulate_tracks(&scenario) {
            for s in &t.states {
                assert!(scenario.region.contains(s[0], s[1]));
            }
        }
    }

    #[test]
    fn perfect_detection_no_clutter_counts() {
        let mut scenario = linear_demo_scenario();
        for s in &mut scenario.sensors {
            s.set_detection_prob(1.0);
            s.set_clutter_rate(0.0);
        }
        let tracks = simulate_tracks(&scenario);
        let frames = generate_measurements(&scenario, &tracks, 3);
        for (k, frame) in frames.iter().enumerate() {
            let alive = tracks.iter().filter(|t| t.alive_at(k + 1)).count();
            for m in frame.sizes() {
                assert_eq!(m, alive);
            }
        }
    }

    #[test]
    fn zero_detection_zero_clutter_empty() {
        let mut scenario = linear_demo_scenario();
        for s in &mut scenario.sensors {
            s.set_detection_prob(0.0);
            s.set_clutter_rate(0.0);
        }
        let tracks = simulate_tracks(&scenario);
        let frames = generate_measurements(&scenario, &tracks, 3);
        assert!(frames.iter().all(|f| f.total_measurements() == 0));
    }

    #[test]
    fn bearing_geometry() {
        let spec = SensorSpec::Bearing {
            position: [0.0, 0.0],
            noise_std_deg: 1.0,
            detection_prob: 1.0,
            clutter_rate: 0.0,
        };
        // Noise-free angles via the observation model this sensor builds.
        let region = Region { min: [-10.0, -10.0], max: [10.0, 10.0] };
        let model = spec.build(&region, 2);
        if let Observation::Bearing(b) = &model.observation {
            assert!((b.bearing_deg(&DVector::from_vec(vec![0.0, 5.0])) - 90.0).abs() < 1e-12);
            assert!((b.bearing_deg(&DVector::from_vec(vec![-1.0, 0.0])) - 180.0).abs() < 1e-12);
        } else {
            panic!("expected bearing observation");
        }
        assert!((wrap_deg_360(359.5 + 1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bearing_outputs_in_range() {
        let scenario = bearing_demo_scenario();
        let tracks = simulate_tracks(&scenario);
        let frames = generate_bearing_measurements(&scenario, &tracks, 5);
        for f in &frames {
            for zs in &f.per_sensor {
                for z in zs {
                    assert!(z[0] >= 0.0 && z[0] < 360.0);
                }
            }
        }
    }
}
