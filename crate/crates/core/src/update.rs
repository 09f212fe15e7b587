//! Scalar and mixture ingredients of the multisensor CPHD update.
//!
//! For a normalized predicted PHD `r` and a frame of per-sensor
//! measurement sets, each measurement subset `W` carries a likelihood
//! ratio `d_W` (target origin vs clutter origin) and a normalized
//! posterior mixture (the product of `r` with the subset
//! pseudolikelihood). Partitions combine subsets; their weights mix the
//! clutter PGF derivatives `kappa_P`, the predicted-cardinality PGF
//! derivatives evaluated at the miss probability `gamma`, and the product
//! of subset ratios. This module computes all of these in log domain.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::cardinality::{
    log_clutter_pgf_derivative_at_zero, log_pgf_derivative, CardinalityDistribution,
};
use crate::gaussian::{GaussianComponent, GaussianMixture};
use crate::linalg::{floor_log, ln_falling_factorial, log_sum_exp};
use crate::measurement::MeasurementFrame;
use crate::partition::{MeasurementSubset, Partition};
use crate::sensor::SensorModel;
use crate::{Error, Result};

/// Probability that a target is detected by no sensor. With constant
/// detection probabilities this is the product of the miss probabilities.
pub fn compute_gamma(sensors: &[SensorModel]) -> f64 {
    sensors.iter().map(|s| s.miss_prob()).product()
}

/// Per-subset quantities shared by the ratio `d_W` and the posterior
/// mixture: both integrate the same chained-update product over the
/// normalized predicted PHD.
#[derive(Debug, Clone)]
pub struct SubsetStats {
    /// Log of the subset likelihood ratio `d_W`.
    pub log_dw: f64,
    /// Per-component log numerators (prior log weight plus detection, miss
    /// and chained marginal-likelihood terms) and the chained posterior
    /// component, before normalization.
    components: Vec<(f64, GaussianComponent)>,
}

impl SubsetStats {
    /// The normalized Gaussian mixture representing the product of the
    /// predicted PHD with the subset pseudolikelihood.
    pub fn posterior(&self) -> Result<GaussianMixture> {
        let logs: Vec<f64> = self.components.iter().map(|(l, _)| *l).collect();
        let lse = log_sum_exp(&logs);
        if lse == f64::NEG_INFINITY {
            return Err(Error::DegenerateSubsetPosterior);
        }
        Ok(GaussianMixture::from_components(
            self.components
                .iter()
                .map(|(l, c)| c.with_weight((l - lse).exp()))
                .collect(),
        ))
    }
}

/// Chains the single-sensor updates of every component of `r` over the
/// measurements of `subset`, producing the subset ratio and the material
/// for its posterior mixture in one pass.
///
/// `r` must be normalized (weights summing to one).
pub fn subset_stats(
    r: &GaussianMixture,
    subset: &MeasurementSubset,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
) -> Result<SubsetStats> {
    let mut log_miss = 0.0;
    let mut log_detect_const = 0.0;
    let mut log_clutter = 0.0;
    for (j, sensor) in sensors.iter().enumerate() {
        if subset.contains_sensor(j) {
            log_detect_const += sensor.detection_prob.ln();
        } else {
            log_miss += sensor.miss_prob().ln();
        }
    }
    for idx in subset.indices() {
        log_clutter += sensors[idx.sensor].log_clutter_density();
    }

    let mut components = Vec::with_capacity(r.len());
    for comp in &r.components {
        let mut state = comp.with_weight(comp.weight);
        let mut log_marginals = 0.0;
        let mut dead = false;
        for idx in subset.indices() {
            let z = frame.measurement(idx);
            match sensors[idx.sensor].update_component_log(&state, z) {
                Ok((updated, lm)) => {
                    state = updated;
                    log_marginals += lm;
                }
                Err(err) => {
                    log::debug!("component dropped from subset posterior: {err}");
                    dead = true;
                    break;
                }
            }
        }
        let log_w = if dead || comp.weight <= 0.0 {
            f64::NEG_INFINITY
        } else {
            floor_log(comp.weight.ln() + log_detect_const + log_miss + log_marginals)
        };
        components.push((log_w, state));
    }

    let numerator = log_sum_exp(&components.iter().map(|(l, _)| *l).collect::<Vec<_>>());
    Ok(SubsetStats { log_dw: floor_log(numerator - log_clutter), components })
}

/// Log of the subset likelihood ratio `d_W` under the normalized predicted
/// PHD `r`. For the empty subset this equals the log of
/// [`compute_gamma`].
pub fn compute_log_dw(
    r: &GaussianMixture,
    subset: &MeasurementSubset,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
) -> Result<f64> {
    Ok(subset_stats(r, subset, frame, sensors)?.log_dw)
}

/// Normalized posterior mixture for one subset (the product of `r` with
/// the subset pseudolikelihood, scaled to unit total weight).
pub fn posterior_gm_for_subset(
    r: &GaussianMixture,
    subset: &MeasurementSubset,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
) -> Result<GaussianMixture> {
    subset_stats(r, subset, frame, sensors)?.posterior()
}

/// Log of `kappa_P`: the product over sensors of the clutter-count PGF
/// derivative of order `m_j - |P|_j` at zero.
pub fn compute_log_kappa(
    partition: &Partition,
    sensors: &[SensorModel],
    frame_sizes: &[usize],
) -> Result<f64> {
    let mut total = 0.0;
    for (j, sensor) in sensors.iter().enumerate() {
        let assigned = partition.per_sensor_count(j);
        if assigned > frame_sizes[j] {
            return Err(Error::InvalidPartition);
        }
        total += log_clutter_pgf_derivative_at_zero(&sensor.clutter.kind, frame_sizes[j] - assigned);
    }
    Ok(total)
}

/// One partition with its precomputed log scores.
#[derive(Debug, Clone)]
pub struct PartitionTerm {
    pub partition: Partition,
    /// Sum of `log d_W` over the partition's subsets (zero for the
    /// all-clutter partition).
    pub log_d_p: f64,
    pub log_kappa: f64,
}

impl PartitionTerm {
    /// `log(kappa_P) + log(M^(v)(gamma)) + log(prod d_W)` with the
    /// derivative order `v` offset from `|P| - 1` by `extra`.
    fn log_weight(&self, predicted: &CardinalityDistribution, gamma: f64, extra: usize) -> f64 {
        self.log_kappa
            + log_pgf_derivative(predicted, self.partition.size() - 1 + extra, gamma)
            + self.log_d_p
    }
}

/// Mixture weights of the update pseudolikelihood: `alpha0` for the
/// missed-detection term and one `alpha_P` per partition (returned in log
/// form, normalized so they sum to one).
///
/// Fails when every partition weight vanishes, i.e. the model assigns zero
/// likelihood to every explanation of the frame.
pub fn compute_alphas(
    terms: &[PartitionTerm],
    predicted: &CardinalityDistribution,
    gamma: f64,
) -> Result<(f64, Vec<f64>)> {
    let denom_logs: Vec<f64> =
        terms.iter().map(|t| t.log_weight(predicted, gamma, 0)).collect();
    let denom = log_sum_exp(&denom_logs);
    if denom == f64::NEG_INFINITY {
        return Err(Error::InfeasibleUpdate);
    }
    let numer_logs: Vec<f64> =
        terms.iter().map(|t| t.log_weight(predicted, gamma, 1)).collect();
    let alpha0 = (log_sum_exp(&numer_logs) - denom).exp();
    let log_alpha_p = denom_logs.into_iter().map(|l| l - denom).collect();
    Ok((alpha0, log_alpha_p))
}

/// Log numerator of the cardinality update at count `n`: the sum over
/// partitions with `|P| <= n + 1` of
/// `kappa_P * n!/(n - |P| + 1)! * gamma^(n - |P| + 1) * prod d_W`.
pub fn cardinality_update_terms(terms: &[PartitionTerm], gamma: f64, n: usize) -> f64 {
    let logs: Vec<f64> = terms
        .iter()
        .filter(|t| t.partition.size() <= n + 1)
        .map(|t| {
            let drop = t.partition.size() - 1;
            let power = (n - drop) as f64;
            let gamma_term = if n == drop {
                0.0
            } else if gamma == 0.0 {
                f64::NEG_INFINITY
            } else {
                power * gamma.ln()
            };
            t.log_kappa + ln_falling_factorial(n, drop) + gamma_term + t.log_d_p
        })
        .collect();
    log_sum_exp(&logs)
}

/// Builds [`PartitionTerm`]s for a partition list, looking subset ratios
/// up in `log_dw`.
pub fn partition_terms(
    partitions: Vec<Partition>,
    log_dw: &BTreeMap<MeasurementSubset, f64>,
    sensors: &[SensorModel],
    frame_sizes: &[usize],
) -> Result<Vec<PartitionTerm>> {
    partitions
        .into_iter()
        .map(|partition| {
            let log_d_p = partition
                .subsets()
                .iter()
                .map(|w| log_dw.get(w).copied().expect("subset ratio cached"))
                .sum();
            let log_kappa = compute_log_kappa(&partition, sensors, frame_sizes)?;
            Ok(PartitionTerm { partition, log_d_p, log_kappa })
        })
        .collect()
}

/// Diagnostics of one update step, exposed for verification: the raw
/// (pre-reduction) posterior alongside the internal mixture weights.
#[derive(Debug, Clone)]
pub struct UpdateDetails {
    pub gamma: f64,
    /// Weight of the missed-detection term. Equals the predicted mean
    /// count when the predicted cardinality and clutter are Poisson.
    pub alpha0: f64,
    /// Per-partition log weights, aligned with `partitions`.
    pub log_alpha_p: Vec<f64>,
    /// Per-partition clutter factors, aligned with `partitions`.
    pub log_kappa: Vec<f64>,
    pub partitions: Vec<Partition>,
    /// Log likelihood ratio of every subset that was scored.
    pub subset_log_dw: Vec<(MeasurementSubset, f64)>,
    /// Posterior PHD before pruning, merging and capping.
    pub raw_posterior: GaussianMixture,
    /// Posterior cardinality (CPHD updates only).
    pub raw_cardinality: Option<CardinalityDistribution>,
}

/// Applies the cardinality update ratio to the predicted distribution.
pub fn updated_cardinality(
    predicted: &CardinalityDistribution,
    terms: &[PartitionTerm],
    gamma: f64,
) -> Result<CardinalityDistribution> {
    let log_num: Vec<f64> = (0..=predicted.n_max())
        .map(|n| cardinality_update_terms(terms, gamma, n))
        .collect();
    let max = log_num.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::InfeasibleUpdate);
    }
    let probs: Vec<f64> = predicted
        .probs()
        .iter()
        .zip(&log_num)
        .map(|(&p, &l)| if p > 0.0 { p * (l - max).exp() } else { 0.0 })
        .collect();
    if probs.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InfeasibleUpdate);
    }
    Ok(CardinalityDistribution::from_probs(probs))
}

/// Evaluates a Gaussian-mixture PHD at a set of probe points; handy for
/// comparing posteriors produced by different routes.
pub fn eval_phd_grid(gm: &GaussianMixture, points: &[DVector<f64>]) -> Result<Vec<f64>> {
    points.iter().map(|p| gm.eval(p)).collect()
}
