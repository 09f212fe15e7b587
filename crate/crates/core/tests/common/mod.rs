//! Shared helpers for the integration tests: quadrature oracles,
//! brute-force enumeration independent of the library code paths, random
//! desk-scale instances, and mixture comparison.

#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use mscphd::cardinality::{CardinalityDistribution, ClutterModel};
use mscphd::filters::{FilterConfig, FilterMode, FilterState};
use mscphd::gaussian::{
    GaussianComponent, GaussianMixture, LinearObservationModel, MotionModel, ReductionParams,
};
use mscphd::measurement::MeasurementFrame;
use mscphd::partition::{GreedyParams, MeasurementSubset, Partition, SensorOrder};
use mscphd::sensor::{Observation, SensorModel};

/// Composite Simpson quadrature; `n` intervals (rounded up to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

pub fn gauss1(x: f64, mean: f64, var: f64) -> f64 {
    (-0.5 * (x - mean) * (x - mean) / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Scalar observation matrix and noise variance of a 1-D linear sensor.
pub fn scalar_model(sensor: &SensorModel) -> (f64, f64) {
    match &sensor.observation {
        Observation::Linear(m) => (m.obs_matrix[(0, 0)], m.noise_cov[(0, 0)]),
        Observation::Bearing(_) => panic!("expected linear sensor"),
    }
}

/// Quadrature evaluation of the per-component subset score on 1-D states:
/// integral of the component density times the detection likelihood
/// product, times the miss probabilities of the active sensors without a
/// measurement in the subset, divided by the clutter densities.
pub fn beta_quadrature(
    comp: &GaussianComponent,
    subset: &MeasurementSubset,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
    active: &[usize],
) -> f64 {
    let mean = comp.mean[0];
    let sd = comp.covariance[(0, 0)].sqrt();
    let integrand = |x: f64| {
        let mut v = gauss1(x, mean, comp.covariance[(0, 0)]);
        for idx in subset.indices() {
            let sensor = &sensors[idx.sensor];
            let (h, r) = scalar_model(sensor);
            let z = frame.measurement(idx)[0];
            v *= sensor.detection_prob * gauss1(z, h * x, r);
        }
        v
    };
    let integral = simpson(integrand, mean - 60.0 * sd, mean + 60.0 * sd, 400_000);

    let mut miss = 1.0;
    for &j in active {
        if !subset.contains_sensor(j) {
            miss *= sensors[j].miss_prob();
        }
    }
    let mut clutter = 1.0;
    for idx in subset.indices() {
        clutter *= sensors[idx.sensor].clutter.spatial.density();
    }
    integral * miss / clutter
}

/// Quadrature evaluation of the mixture-level subset ratio `d_W`.
pub fn dw_quadrature(
    r: &GaussianMixture,
    subset: &MeasurementSubset,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
) -> f64 {
    let active: Vec<usize> = (0..sensors.len()).collect();
    r.components
        .iter()
        .map(|c| c.weight * beta_quadrature(&c.with_weight(1.0), subset, frame, sensors, &active))
        .sum()
}

pub type CanonicalPartition = BTreeSet<BTreeSet<(usize, usize)>>;

pub fn canonical(p: &Partition) -> CanonicalPartition {
    p.subsets()
        .iter()
        .map(|w| w.indices().iter().map(|i| (i.sensor, i.index)).collect())
        .collect()
}

/// Brute-force generator of every valid partition, independent of the
/// recursive construction: each measurement is assigned either to clutter
/// or to one of K candidate groups, groups are checked against the
/// one-measurement-per-sensor rule and canonicalized.
pub fn brute_force_partitions(sizes: &[usize]) -> BTreeSet<CanonicalPartition> {
    let measurements: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(j, &m)| (0..m).map(move |l| (j, l)))
        .collect();
    let k = measurements.len();
    let mut out = BTreeSet::new();
    let labels = k + 1;
    let total = (labels as u64).pow(k as u32);
    'outer: for code in 0..total {
        let mut c = code;
        let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
        for &(j, l) in &measurements {
            let label = (c % labels as u64) as usize;
            c /= labels as u64;
            if label > 0 {
                groups[label - 1].push((j, l));
            }
        }
        let mut partition: CanonicalPartition = BTreeSet::new();
        for g in groups.into_iter().filter(|g| !g.is_empty()) {
            let sensors: BTreeSet<usize> = g.iter().map(|&(j, _)| j).collect();
            if sensors.len() != g.len() {
                continue 'outer; // two measurements of one sensor in a group
            }
            partition.insert(g.into_iter().collect());
        }
        out.insert(partition);
    }
    out
}

/// A randomly generated desk-scale CPHD update instance.
pub struct DeskInstance {
    pub config: FilterConfig,
    pub frame: MeasurementFrame,
    pub predicted: FilterState,
}

pub struct DeskOptions {
    pub sensors: std::ops::RangeInclusive<usize>,
    pub components: std::ops::RangeInclusive<usize>,
    pub measurements: std::ops::RangeInclusive<usize>,
    pub clutter_rates: Vec<f64>,
    /// Cardinality vector length; mass above the component count stays
    /// zero so every partition that matters is reachable by the greedy
    /// construction.
    pub n_max: usize,
    pub poisson_cardinality: Option<f64>,
}

impl Default for DeskOptions {
    fn default() -> Self {
        Self {
            sensors: 2..=3,
            components: 1..=3,
            measurements: 0..=3,
            clutter_rates: vec![0.5, 2.0],
            n_max: 6,
            poisson_cardinality: None,
        }
    }
}

pub const DESK_AREA: f64 = 400.0;

pub fn random_desk(rng: &mut ChaCha8Rng, opts: &DeskOptions) -> DeskInstance {
    let n_sensors = rng.gen_range(opts.sensors.clone());
    let n_comps = rng.gen_range(opts.components.clone());

    let sensors: Vec<SensorModel> = (0..n_sensors)
        .map(|_| {
            let p_d = rng.gen_range(0.3..0.95);
            let noise = rng.gen_range(0.5..2.0);
            let rate = *opts.clutter_rates.choose(rng).unwrap();
            SensorModel::new(
                p_d,
                Observation::Linear(LinearObservationModel::new(
                    DMatrix::identity(2, 2),
                    DMatrix::identity(2, 2) * (noise * noise),
                )),
                ClutterModel::poisson_rect(rate, DESK_AREA),
            )
        })
        .collect();

    let components: Vec<GaussianComponent> = (0..n_comps)
        .map(|_| {
            let mean = DVector::from_vec(vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]);
            let a = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
            let cov = &a * a.transpose() + DMatrix::identity(2, 2) * 0.5;
            GaussianComponent::new(rng.gen_range(0.2..1.0), mean, cov)
        })
        .collect();

    let cardinality = match opts.poisson_cardinality {
        Some(mu) => CardinalityDistribution::truncated_poisson(mu, opts.n_max),
        None => {
            // Random support on 0..=n_comps, zero above: every partition
            // with positive weight stays reachable from component columns.
            let mut probs = vec![0.0; opts.n_max + 1];
            for p in probs.iter_mut().take(n_comps + 1) {
                *p = rng.gen_range(0.05..1.0);
            }
            CardinalityDistribution::from_probs(probs)
        }
    };

    // Predicted PHD mass and predicted mean count are the same quantity.
    let mean = mscphd::cardinality::mean_cardinality(&cardinality);
    let total: f64 = components.iter().map(|c| c.weight).sum();
    let phd = GaussianMixture::from_components(
        components
            .into_iter()
            .map(|c| {
                let w = c.weight * mean / total;
                c.with_weight(w)
            })
            .collect(),
    );

    let frame = MeasurementFrame::new(
        (0..n_sensors)
            .map(|_| {
                let m = rng.gen_range(opts.measurements.clone());
                (0..m)
                    .map(|_| {
                        DVector::from_vec(vec![rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)])
                    })
                    .collect()
            })
            .collect(),
    );

    let config = FilterConfig {
        survival_prob: 0.99,
        motion: MotionModel::random_walk(2, 0.3),
        sensors,
        greedy: maximal_beams(),
        reduction: ReductionParams::none(),
        n_max: opts.n_max,
        mode: FilterMode::GCphd,
        exact_update: false,
    };

    DeskInstance {
        config,
        frame,
        predicted: FilterState { phd, cardinality: Some(cardinality) },
    }
}

pub fn maximal_beams() -> GreedyParams {
    GreedyParams { w_max: 1_000_000, p_max: 1_000_000, sensor_order: SensorOrder::Ascending }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Asserts two mixtures are equal component-by-component (same order)
/// within a relative tolerance.
pub fn assert_mixtures_close(a: &GaussianMixture, b: &GaussianMixture, tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: component counts differ");
    for (i, (ca, cb)) in a.components.iter().zip(&b.components).enumerate() {
        assert!(
            rel_err(ca.weight, cb.weight) <= tol,
            "{what}: component {i} weight {} vs {}",
            ca.weight,
            cb.weight
        );
        for d in 0..ca.mean.len() {
            assert!(
                rel_err(ca.mean[d], cb.mean[d]) <= tol,
                "{what}: component {i} mean[{d}] {} vs {}",
                ca.mean[d],
                cb.mean[d]
            );
        }
        for r in 0..ca.covariance.nrows() {
            for c in 0..ca.covariance.ncols() {
                assert!(
                    rel_err(ca.covariance[(r, c)], cb.covariance[(r, c)]) <= tol,
                    "{what}: component {i} cov[({r},{c})] {} vs {}",
                    ca.covariance[(r, c)],
                    cb.covariance[(r, c)]
                );
            }
        }
    }
}

pub fn assert_cardinality_close(
    a: &CardinalityDistribution,
    b: &CardinalityDistribution,
    tol: f64,
    what: &str,
) {
    assert_eq!(a.n_max(), b.n_max(), "{what}: supports differ");
    for (n, (pa, pb)) in a.probs().iter().zip(b.probs()).enumerate() {
        assert!(
            (pa - pb).abs() <= tol * pa.abs().max(pb.abs()).max(1.0),
            "{what}: cardinality p({n}) {pa} vs {pb}"
        );
    }
}
