//! Measurement subsets, partitions, exact enumeration and the greedy
//! trellis construction of both.
//!
//! A *measurement subset* `W` collects measurements from one frame with at
//! most one measurement per sensor, hypothesized to originate from a single
//! target. A *partition* is a family of disjoint nonempty subsets; every
//! measurement not covered by the family is implicitly clutter.
//!
//! Two construction routes are provided. [`enumerate_partitions`] builds
//! every valid partition by a sensor-by-sensor recursion (each new
//! measurement either is clutter, starts a new singleton subset, or extends
//! an existing subset not yet holding a measurement of its sensor) and
//! serves as the exact reference for small frames. The pair
//! [`greedy_subsets_per_component`] / [`greedy_partitions`] is the
//! tractable beam-search approximation: first a trellis over sensors keeps
//! the highest-scoring subsets for each Gaussian component, then a trellis
//! over components assembles disjoint subsets into partitions.

use std::collections::HashSet;

use crate::gaussian::GaussianComponent;
use crate::linalg::floor_log;
use crate::measurement::MeasurementFrame;
use crate::sensor::SensorModel;
use crate::{Error, Result};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Guard against runaway exact enumeration.
pub const ENUMERATION_GUARD: usize = 10_000_000;

/// Identifies one measurement within a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementIndex {
    pub sensor: usize,
    pub index: usize,
}

impl MeasurementIndex {
    pub fn new(sensor: usize, index: usize) -> Self {
        Self { sensor, index }
    }
}

/// A set of measurement indices with at most one entry per sensor, kept
/// sorted by sensor for canonical comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MeasurementSubset {
    indices: Vec<MeasurementIndex>,
}

impl MeasurementSubset {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut indices: Vec<MeasurementIndex>) -> Result<Self> {
        indices.sort();
        for pair in indices.windows(2) {
            if pair[0].sensor == pair[1].sensor {
                return Err(Error::DuplicateSensor(pair[0].sensor));
            }
        }
        Ok(Self { indices })
    }

    pub fn singleton(idx: MeasurementIndex) -> Self {
        Self { indices: vec![idx] }
    }

    /// Extends the subset with a measurement from a sensor not yet present.
    pub fn with(&self, idx: MeasurementIndex) -> Result<Self> {
        if self.contains_sensor(idx.sensor) {
            return Err(Error::DuplicateSensor(idx.sensor));
        }
        let mut indices = self.indices.clone();
        indices.push(idx);
        indices.sort();
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[MeasurementIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains_sensor(&self, sensor: usize) -> bool {
        self.indices.iter().any(|i| i.sensor == sensor)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.indices.iter().all(|i| !other.indices.contains(i))
    }
}

/// A family of pairwise-disjoint nonempty measurement subsets; the
/// complement of their union within the frame is the clutter set.
///
/// Following the counting convention of the update equations, the clutter
/// set counts as one element, so [`Partition::size`] is the number of
/// stored subsets plus one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition {
    subsets: Vec<MeasurementSubset>,
}

impl Partition {
    /// The all-clutter partition.
    pub fn all_clutter() -> Self {
        Self::default()
    }

    pub fn new(mut subsets: Vec<MeasurementSubset>) -> Result<Self> {
        if subsets.iter().any(|w| w.is_empty()) {
            return Err(Error::InvalidPartition);
        }
        subsets.sort();
        for i in 0..subsets.len() {
            for j in (i + 1)..subsets.len() {
                if !subsets[i].is_disjoint(&subsets[j]) {
                    return Err(Error::InvalidPartition);
                }
            }
        }
        Ok(Self { subsets })
    }

    pub fn subsets(&self) -> &[MeasurementSubset] {
        &self.subsets
    }

    /// `|P|`: the number of subsets plus one for the clutter set.
    pub fn size(&self) -> usize {
        self.subsets.len() + 1
    }

    /// `|P|_j`: how many measurements of sensor `j` the partition assigns
    /// to targets.
    pub fn per_sensor_count(&self, sensor: usize) -> usize {
        self.subsets.iter().filter(|w| w.contains_sensor(sensor)).count()
    }
}

/// A measurement subset together with its log-domain score (per-component
/// beta during subset selection, global d_W during partition construction).
#[derive(Debug, Clone)]
pub struct ScoredSubset {
    pub subset: MeasurementSubset,
    pub log_score: f64,
}

/// Order in which the subset trellis consumes sensors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SensorOrder {
    /// Ascending sensor index.
    Ascending,
    /// An explicit processing order (a permutation of sensor indices).
    Fixed(Vec<usize>),
    /// A random permutation drawn deterministically from this seed.
    Seeded(u64),
}

impl SensorOrder {
    fn resolve(&self, sensor_count: usize) -> Vec<usize> {
        match self {
            SensorOrder::Ascending => (0..sensor_count).collect(),
            SensorOrder::Fixed(order) => {
                debug_assert_eq!(order.len(), sensor_count);
                order.clone()
            }
            SensorOrder::Seeded(seed) => {
                let mut order: Vec<usize> = (0..sensor_count).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                order.shuffle(&mut rng);
                order
            }
        }
    }
}

/// Beam widths and sensor processing order for the two greedy passes.
#[derive(Debug, Clone)]
pub struct GreedyParams {
    /// Maximum number of measurement subsets retained per component.
    pub w_max: usize,
    /// Maximum number of partitions retained.
    pub p_max: usize,
    pub sensor_order: SensorOrder,
}

impl Default for GreedyParams {
    fn default() -> Self {
        Self { w_max: 6, p_max: 6, sensor_order: SensorOrder::Ascending }
    }
}

impl GreedyParams {
    /// Copy of the parameters with the order seed mixed with a salt, so
    /// each Gaussian component can draw its own sensor permutation.
    pub fn salted(&self, salt: u64) -> Self {
        let sensor_order = match &self.sensor_order {
            SensorOrder::Seeded(seed) => {
                SensorOrder::Seeded(seed.wrapping_add(salt.wrapping_mul(0x9E3779B97F4A7C15)))
            }
            other => other.clone(),
        };
        Self { w_max: self.w_max, p_max: self.p_max, sensor_order }
    }
}

/// Enumerates every measurement subset of the frame, including the empty
/// one: the cartesian product of (no detection | each measurement) over
/// sensors, `prod_j (m_j + 1)` subsets in total.
pub fn enumerate_subsets(frame: &MeasurementFrame) -> Result<Vec<MeasurementSubset>> {
    let count = frame.subset_count();
    if count > ENUMERATION_GUARD {
        return Err(Error::EnumerationTooLarge(count));
    }
    let mut subsets = vec![MeasurementSubset::empty()];
    for (j, zs) in frame.per_sensor.iter().enumerate() {
        let mut next = Vec::with_capacity(subsets.len() * (zs.len() + 1));
        for s in &subsets {
            next.push(s.clone());
            for l in 0..zs.len() {
                next.push(s.with(MeasurementIndex::new(j, l)).expect("sensor not yet present"));
            }
        }
        subsets = next;
    }
    Ok(subsets)
}

/// Enumerates every valid partition of the frame exactly once, including
/// the all-clutter partition.
pub fn enumerate_partitions(frame: &MeasurementFrame) -> Result<Vec<Partition>> {
    enumerate_partitions_capped(frame, ENUMERATION_GUARD)
}

/// As [`enumerate_partitions`] with an explicit size guard.
///
/// Processes sensors one at a time; each measurement of the new sensor
/// either stays clutter, opens a new singleton subset, or joins one of the
/// partition's existing subsets (at most one new measurement per subset,
/// which preserves the one-per-sensor invariant).
pub fn enumerate_partitions_capped(
    frame: &MeasurementFrame,
    cap: usize,
) -> Result<Vec<Partition>> {
    let mut partial: Vec<Vec<MeasurementSubset>> = vec![Vec::new()];
    for (j, zs) in frame.per_sensor.iter().enumerate() {
        let mut next: Vec<Vec<MeasurementSubset>> = Vec::new();
        for p in &partial {
            extend_with_sensor(p, j, zs.len(), &mut next);
            if next.len() > cap {
                return Err(Error::EnumerationTooLarge(next.len()));
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(Partition::new)
        .collect::<Result<Vec<_>>>()
}

/// All ways of distributing the `m` measurements of sensor `j` over an
/// existing partition.
fn extend_with_sensor(
    base: &[MeasurementSubset],
    sensor: usize,
    m: usize,
    out: &mut Vec<Vec<MeasurementSubset>>,
) {
    // taken[k]: existing subset k already received a measurement of this
    // sensor during this extension.
    fn rec(
        l: usize,
        m: usize,
        sensor: usize,
        existing: &mut Vec<MeasurementSubset>,
        taken: &mut Vec<bool>,
        fresh: &mut Vec<MeasurementSubset>,
        out: &mut Vec<Vec<MeasurementSubset>>,
    ) {
        if l == m {
            let mut combined = existing.clone();
            combined.extend(fresh.iter().cloned());
            out.push(combined);
            return;
        }
        let idx = MeasurementIndex::new(sensor, l);
        // Clutter.
        rec(l + 1, m, sensor, existing, taken, fresh, out);
        // New singleton subset.
        fresh.push(MeasurementSubset::singleton(idx));
        rec(l + 1, m, sensor, existing, taken, fresh, out);
        fresh.pop();
        // Join an existing subset that has no measurement of this sensor yet.
        for k in 0..existing.len() {
            if taken[k] {
                continue;
            }
            let saved = existing[k].clone();
            existing[k] = saved.with(idx).expect("existing subsets predate this sensor");
            taken[k] = true;
            rec(l + 1, m, sensor, existing, taken, fresh, out);
            existing[k] = saved;
            taken[k] = false;
        }
    }

    let mut existing = base.to_vec();
    let mut taken = vec![false; existing.len()];
    let mut fresh = Vec::new();
    rec(0, m, sensor, &mut existing, &mut taken, &mut fresh, out);
}

/// Log-domain subset score for one Gaussian component: the likelihood
/// ratio that the subset was generated by the target this component
/// represents rather than by clutter.
///
/// The component is treated as normalized to unit weight. Detection terms
/// chain the single-measurement updates over the subset and accumulate
/// their marginal likelihoods; every sensor of the frame without a
/// measurement in the subset contributes its miss probability. When
/// `restrict_to_first` is given, only that many leading sensors contribute
/// miss factors (the partial scores used while the trellis is still
/// consuming sensors).
pub fn subset_score_beta(
    component: &GaussianComponent,
    subset: &MeasurementSubset,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
    restrict_to_first: Option<usize>,
) -> Result<f64> {
    let limit = restrict_to_first.unwrap_or(sensors.len());
    let active: Vec<usize> = (0..limit).collect();
    subset_log_beta_over(component, subset, frame, sensors, &active)
}

/// [`subset_score_beta`] over an explicit set of active sensors, used by
/// the trellis when sensors are processed in permuted order.
pub fn subset_log_beta_over(
    component: &GaussianComponent,
    subset: &MeasurementSubset,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
    active: &[usize],
) -> Result<f64> {
    debug_assert!(
        subset.indices().iter().all(|i| active.contains(&i.sensor)),
        "subset references a sensor outside the active set"
    );
    let mut state = component.clone();
    let mut score = 0.0;
    for idx in subset.indices() {
        let sensor = &sensors[idx.sensor];
        let z = frame.measurement(idx);
        let (updated, log_marginal) = sensor.update_component_log(&state, z)?;
        state = updated;
        score += sensor.detection_prob.ln() + log_marginal - sensor.log_clutter_density();
    }
    for &j in active {
        if !subset.contains_sensor(j) {
            score += sensors[j].miss_prob().ln();
        }
    }
    Ok(floor_log(score))
}

fn sort_desc_stable<T>(items: &mut [T], score: impl Fn(&T) -> f64) {
    items.sort_by(|a, b| score(b).total_cmp(&score(a)));
}

/// Greedy subset selection for one Gaussian component.
///
/// Sensors are consumed in the order given by the params; after each
/// sensor, every retained partial subset is extended by that sensor's
/// no-detection node and by each of its measurements, scored by the
/// partial beta over the sensors seen so far, and the `w_max` best are
/// kept (stable on ties). The returned list is sorted by descending
/// full-frame score, with the empty subset appended if the beam dropped
/// it: it represents the undetected event and must stay available to the
/// partition construction.
pub fn greedy_subsets_per_component(
    component: &GaussianComponent,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
    params: &GreedyParams,
) -> Result<Vec<ScoredSubset>> {
    struct Node {
        subset: MeasurementSubset,
        state: GaussianComponent,
        score: f64,
    }

    let order = params.sensor_order.resolve(sensors.len());
    let mut beam = vec![Node {
        subset: MeasurementSubset::empty(),
        state: component.clone(),
        score: 0.0,
    }];

    for &j in &order {
        let sensor = &sensors[j];
        let zs = &frame.per_sensor[j];
        let log_pd = sensor.detection_prob.ln();
        let log_qd = sensor.miss_prob().ln();
        let log_c = sensor.log_clutter_density();

        let mut pool = Vec::with_capacity(beam.len() * (zs.len() + 1));
        for node in &beam {
            pool.push(Node {
                subset: node.subset.clone(),
                state: node.state.clone(),
                score: floor_log(node.score + log_qd),
            });
            for (l, z) in zs.iter().enumerate() {
                match sensor.update_component_log(&node.state, z) {
                    Ok((updated, log_marginal)) => pool.push(Node {
                        subset: node
                            .subset
                            .with(MeasurementIndex::new(j, l))
                            .expect("each sensor visited once"),
                        state: updated,
                        score: floor_log(node.score + log_pd + log_marginal - log_c),
                    }),
                    Err(err) => {
                        log::debug!("skipping subset extension: {err}");
                    }
                }
            }
        }
        sort_desc_stable(&mut pool, |n| n.score);
        pool.truncate(params.w_max);
        beam = pool;
    }

    let mut out: Vec<ScoredSubset> = beam
        .into_iter()
        .map(|n| ScoredSubset { subset: n.subset, log_score: n.score })
        .collect();
    if !out.iter().any(|s| s.subset.is_empty()) {
        let log_gamma = sensors.iter().map(|s| s.miss_prob().ln()).sum();
        out.push(ScoredSubset { subset: MeasurementSubset::empty(), log_score: log_gamma });
    }
    Ok(out)
}

/// Greedy partition construction over component columns.
///
/// `per_component_subsets` holds one subset list per Gaussian component,
/// ordered by descending component weight, scored by the global subset
/// likelihood ratio (an empty subset scores zero and always extends a
/// partial partition). Each retained partial partition is extended by
/// every subset of the next column that is disjoint from it; duplicates
/// (the same family of subsets reached through different columns) are
/// collapsed keeping the earliest, and the `p_max` best partitions by
/// accumulated score survive each column.
pub fn greedy_partitions(
    per_component_subsets: &[Vec<ScoredSubset>],
    params: &GreedyParams,
) -> Vec<(Partition, f64)> {
    #[derive(Clone)]
    struct Node {
        subsets: Vec<MeasurementSubset>,
        score: f64,
    }

    let mut beam = vec![Node { subsets: Vec::new(), score: 0.0 }];
    for column in per_component_subsets {
        let mut pool: Vec<Node> = Vec::new();
        let mut seen: HashSet<Vec<MeasurementSubset>> = HashSet::new();
        for node in &beam {
            for scored in column {
                let candidate = if scored.subset.is_empty() {
                    Node { subsets: node.subsets.clone(), score: node.score }
                } else if node.subsets.iter().all(|w| w.is_disjoint(&scored.subset)) {
                    let mut subsets = node.subsets.clone();
                    subsets.push(scored.subset.clone());
                    subsets.sort();
                    Node { subsets, score: node.score + scored.log_score }
                } else {
                    continue;
                };
                if seen.insert(candidate.subsets.clone()) {
                    pool.push(candidate);
                }
            }
        }
        sort_desc_stable(&mut pool, |n| n.score);
        pool.truncate(params.p_max);
        beam = pool;
    }

    beam.into_iter()
        .map(|n| {
            let score = n.score;
            (Partition::new(n.subsets).expect("beam maintains disjointness"), score)
        })
        .collect()
}
