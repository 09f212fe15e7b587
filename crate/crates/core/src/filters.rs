//! The four multitarget filters: general multisensor CPHD (G-CPHD), its
//! PHD special case (G-PHD), and the iterated-corrector baselines
//! (IC-CPHD, IC-PHD) that apply a single-sensor update once per sensor in
//! sequence.
//!
//! All filters share the prediction step and propagate a [`FilterState`]:
//! an unnormalized Gaussian-mixture PHD whose total weight is the expected
//! target count, plus a cardinality distribution for the CPHD variants.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::cardinality::{
    log_clutter_pgf_derivative_at_zero, log_pgf_derivative, map_cardinality, mean_cardinality,
    predict_cardinality, CardinalityDistribution, ClutterKind,
};
use crate::gaussian::{
    component_predict, prune_merge_cap, GaussianComponent, GaussianMixture, MotionModel,
    ReductionParams,
};
use crate::linalg::{floor_log, ln_falling_factorial, log_sum_exp, logaddexp};
use crate::measurement::MeasurementFrame;
use crate::partition::{
    enumerate_partitions_capped, greedy_partitions, greedy_subsets_per_component, GreedyParams,
    MeasurementIndex, MeasurementSubset, Partition, ScoredSubset,
};
use crate::sensor::SensorModel;
use crate::update::{
    compute_alphas, compute_gamma, compute_log_kappa, partition_terms, subset_stats,
    updated_cardinality, SubsetStats, UpdateDetails,
};
use crate::{Error, Result};

/// Exact enumeration is attempted only below these sizes; larger frames
/// fall back to the greedy construction with a logged notice.
pub const EXACT_SUBSET_GUARD: usize = 10_000;
pub const EXACT_PARTITION_GUARD: usize = 100_000;

/// Which filter the update step runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    GCphd,
    GPhd,
    IcCphd,
    IcPhd,
}

impl FilterMode {
    pub fn propagates_cardinality(&self) -> bool {
        matches!(self, FilterMode::GCphd | FilterMode::IcCphd)
    }
}

/// The quantity every filter propagates.
#[derive(Debug, Clone)]
pub struct FilterState {
    /// Unnormalized PHD; total weight is the expected target count.
    pub phd: GaussianMixture,
    /// Full cardinality distribution (CPHD filters only).
    pub cardinality: Option<CardinalityDistribution>,
}

impl FilterState {
    /// Empty initial state: no targets, cardinality concentrated at zero.
    pub fn initial(mode: FilterMode, n_max: usize) -> Self {
        Self {
            phd: GaussianMixture::empty(),
            cardinality: mode
                .propagates_cardinality()
                .then(|| CardinalityDistribution::delta(0, n_max)),
        }
    }

    pub fn expected_count(&self) -> f64 {
        self.phd.total_weight()
    }
}

/// Birth process: intensity mixture plus birth-count distribution. The
/// intensity's total weight should equal the mean of the count
/// distribution.
#[derive(Debug, Clone)]
pub struct BirthModel {
    pub phd: GaussianMixture,
    pub cardinality: CardinalityDistribution,
}

impl BirthModel {
    pub fn new(phd: GaussianMixture, cardinality: CardinalityDistribution) -> Self {
        debug_assert!(
            (phd.total_weight() - mean_cardinality(&cardinality)).abs() < 1e-6,
            "birth intensity mass and birth cardinality mean disagree"
        );
        Self { phd, cardinality }
    }
}

/// Everything a filter step needs besides the state and the measurements.
#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub survival_prob: f64,
    pub motion: MotionModel,
    pub sensors: Vec<SensorModel>,
    pub greedy: GreedyParams,
    pub reduction: ReductionParams,
    pub n_max: usize,
    pub mode: FilterMode,
    /// Use exact partition enumeration when the frame is small enough.
    pub exact_update: bool,
}

/// Prediction step, shared by all filters: survival-thinned motion
/// prediction of every component with the birth intensity appended, and
/// (for CPHD states) binomial-thinning prediction of the cardinality with
/// the constant survival probability as thinning fraction.
pub fn predict(state: &FilterState, config: &FilterConfig, birth: &BirthModel) -> FilterState {
    let mut components: Vec<GaussianComponent> = state
        .phd
        .components
        .iter()
        .map(|c| component_predict(c, &config.motion, config.survival_prob))
        .collect();
    components.extend(birth.phd.components.iter().cloned());
    let cardinality = state.cardinality.as_ref().map(|card| {
        predict_cardinality(
            &card.resized(config.n_max),
            config.survival_prob,
            &birth.cardinality.resized(config.n_max),
        )
    });
    FilterState { phd: GaussianMixture::from_components(components), cardinality }
}

/// Dispatches the update of `config.mode` after running [`predict`].
pub fn step(
    state: &FilterState,
    frame: &MeasurementFrame,
    config: &FilterConfig,
    birth: &BirthModel,
) -> Result<FilterState> {
    let predicted = predict(state, config, birth);
    match config.mode {
        FilterMode::GCphd => gcphd_update(&predicted, frame, config),
        FilterMode::GPhd => gphd_update(&predicted, frame, config),
        FilterMode::IcCphd => ic_cphd_update(&predicted, frame, config),
        FilterMode::IcPhd => ic_phd_update(&predicted, frame, config),
    }
}

type SubsetCache = BTreeMap<MeasurementSubset, SubsetStats>;

fn cached_stats<'a>(
    cache: &'a mut SubsetCache,
    subset: &MeasurementSubset,
    r: &GaussianMixture,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
) -> Result<&'a SubsetStats> {
    if !cache.contains_key(subset) {
        let stats = subset_stats(r, subset, frame, sensors)?;
        cache.insert(subset.clone(), stats);
    }
    Ok(cache.get(subset).expect("just inserted"))
}

enum PartitionScore {
    /// Raw subset likelihood ratios (CPHD partition score).
    Dw,
    /// Poisson-normalized ratios `mu d_W / prod lambda` (PHD partition
    /// score).
    TildeDw { log_mu: f64 },
}

fn tilde_adjustment(subset: &MeasurementSubset, sensors: &[SensorModel]) -> f64 {
    subset
        .indices()
        .iter()
        .map(|idx| match &sensors[idx.sensor].clutter.kind {
            ClutterKind::Poisson { rate } => rate.ln(),
            ClutterKind::Finite(_) => unreachable!("validated Poisson"),
        })
        .sum()
}

/// Candidate partitions for the update: exact enumeration when requested
/// and small enough, otherwise the two-pass greedy construction (subset
/// beams per component scored by beta, then the partition beam scored by
/// the global ratios).
fn candidate_partitions(
    r: &GaussianMixture,
    frame: &MeasurementFrame,
    config: &FilterConfig,
    cache: &mut SubsetCache,
    score: PartitionScore,
) -> Result<Vec<Partition>> {
    if config.exact_update {
        if frame.subset_count() <= EXACT_SUBSET_GUARD {
            match enumerate_partitions_capped(frame, EXACT_PARTITION_GUARD) {
                Ok(parts) => return Ok(parts),
                Err(err) => {
                    log::warn!("exact enumeration abandoned ({err}); using greedy partitions")
                }
            }
        } else {
            log::warn!(
                "frame supports {} subsets, beyond the exact guard; using greedy partitions",
                frame.subset_count()
            );
        }
    }

    // Component columns in decreasing weight order.
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&a, &b| r.components[b].weight.total_cmp(&r.components[a].weight));

    let mut columns: Vec<Vec<ScoredSubset>> = Vec::with_capacity(order.len());
    for (rank, &ci) in order.iter().enumerate() {
        let params = config.greedy.salted(rank as u64);
        let beta_scored =
            greedy_subsets_per_component(&r.components[ci], frame, &config.sensors, &params)?;
        let mut rescored = Vec::with_capacity(beta_scored.len());
        for s in beta_scored {
            let log_score = if s.subset.is_empty() {
                0.0
            } else {
                let stats = cached_stats(cache, &s.subset, r, frame, &config.sensors)?;
                match score {
                    PartitionScore::Dw => stats.log_dw,
                    PartitionScore::TildeDw { log_mu } => {
                        floor_log(log_mu + stats.log_dw - tilde_adjustment(&s.subset, &config.sensors))
                    }
                }
            };
            rescored.push(ScoredSubset { subset: s.subset, log_score });
        }
        columns.push(rescored);
    }
    Ok(greedy_partitions(&columns, &config.greedy)
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

fn ensure_all_clutter(partitions: &mut Vec<Partition>) {
    if !partitions.iter().any(|p| p.subsets().is_empty()) {
        partitions.push(Partition::all_clutter());
    }
}

/// Keeps the `max` heaviest components (stable on ties), rescaling so the
/// total weight is preserved.
fn cap_components(gm: &GaussianMixture, max: usize) -> GaussianMixture {
    if gm.len() <= max {
        return gm.clone();
    }
    let total_in = gm.total_weight();
    let mut comps = gm.components.clone();
    comps.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    comps.truncate(max);
    let mut out = GaussianMixture::from_components(comps);
    let total_out = out.total_weight();
    if total_out > 0.0 {
        out.scale_in_place(total_in / total_out);
    }
    out
}

/// General multisensor CPHD update.
pub fn gcphd_update(
    predicted: &FilterState,
    frame: &MeasurementFrame,
    config: &FilterConfig,
) -> Result<FilterState> {
    Ok(gcphd_update_with_details(predicted, frame, config)?.0)
}

/// As [`gcphd_update`], also returning the internal update quantities for
/// inspection.
pub fn gcphd_update_with_details(
    predicted: &FilterState,
    frame: &MeasurementFrame,
    config: &FilterConfig,
) -> Result<(FilterState, UpdateDetails)> {
    let card_pred = predicted
        .cardinality
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("CPHD update needs a cardinality distribution".into()))?;
    let sensors = &config.sensors;
    let gamma = compute_gamma(sensors);
    let r = predicted.phd.normalized();
    let sizes = frame.sizes();

    let mut cache: SubsetCache = BTreeMap::new();
    let mut partitions = candidate_partitions(&r, frame, config, &mut cache, PartitionScore::Dw)?;
    ensure_all_clutter(&mut partitions);
    for p in &partitions {
        for w in p.subsets() {
            cached_stats(&mut cache, w, &r, frame, sensors)?;
        }
    }

    let log_dw: BTreeMap<MeasurementSubset, f64> =
        cache.iter().map(|(w, s)| (w.clone(), s.log_dw)).collect();
    let terms = partition_terms(partitions.clone(), &log_dw, sensors, &sizes)?;
    let (alpha0, log_alpha_p) = compute_alphas(&terms, card_pred, gamma)?;
    let card_post = updated_cardinality(card_pred, &terms, gamma)?;

    // Posterior PHD: miss term plus the alpha-weighted subset posteriors.
    let mut posterior = r.scaled(alpha0 * gamma);
    let mut coefficients: BTreeMap<MeasurementSubset, f64> = BTreeMap::new();
    for (term, log_a) in terms.iter().zip(&log_alpha_p) {
        let a = log_a.exp();
        if a <= 0.0 {
            continue;
        }
        for w in term.partition.subsets() {
            *coefficients.entry(w.clone()).or_insert(0.0) += a;
        }
    }
    for (w, &c) in &coefficients {
        if c <= 0.0 {
            continue;
        }
        let gm = cache.get(w).expect("cached").posterior()?;
        posterior.components.extend(gm.scaled(c).components);
    }

    // The mixture mass and the cardinality mean are two routes to the same
    // expected count; renormalize onto the cardinality mean.
    let mean_post = mean_cardinality(&card_post);
    let total = posterior.total_weight();
    debug_assert!(
        (total - mean_post).abs() <= 1e-6 * mean_post.max(1.0),
        "posterior mass {total} disagrees with cardinality mean {mean_post}"
    );
    if total > 0.0 {
        posterior.scale_in_place(mean_post / total);
    }

    let details = UpdateDetails {
        gamma,
        alpha0,
        log_alpha_p,
        log_kappa: terms.iter().map(|t| t.log_kappa).collect(),
        partitions,
        subset_log_dw: log_dw.into_iter().collect(),
        raw_posterior: posterior.clone(),
        raw_cardinality: Some(card_post.clone()),
    };

    let reduced = prune_merge_cap(&posterior, &config.reduction);
    let n_hat = map_cardinality(&card_post).max(1);
    let capped = cap_components(&reduced, 4 * n_hat);
    Ok((FilterState { phd: capped, cardinality: Some(card_post) }, details))
}

/// General multisensor PHD update (Poisson clutter required).
pub fn gphd_update(
    predicted: &FilterState,
    frame: &MeasurementFrame,
    config: &FilterConfig,
) -> Result<FilterState> {
    Ok(gphd_update_with_details(predicted, frame, config)?.0)
}

pub fn gphd_update_with_details(
    predicted: &FilterState,
    frame: &MeasurementFrame,
    config: &FilterConfig,
) -> Result<(FilterState, UpdateDetails)> {
    let sensors = &config.sensors;
    for s in sensors {
        match &s.clutter.kind {
            ClutterKind::Poisson { rate } if *rate > 0.0 => {}
            ClutterKind::Poisson { .. } => {
                return Err(Error::InvalidConfig(
                    "PHD update needs a positive Poisson clutter rate".into(),
                ))
            }
            ClutterKind::Finite(_) => return Err(Error::NonPoissonClutter),
        }
    }

    let mu = predicted.phd.total_weight();
    let gamma = compute_gamma(sensors);
    let r = predicted.phd.normalized();

    let mut cache: SubsetCache = BTreeMap::new();
    let score = PartitionScore::TildeDw { log_mu: mu.ln() };
    let mut partitions = candidate_partitions(&r, frame, config, &mut cache, score)?;
    ensure_all_clutter(&mut partitions);
    for p in &partitions {
        for w in p.subsets() {
            cached_stats(&mut cache, w, &r, frame, sensors)?;
        }
    }

    // Partition weights proportional to the product of Poisson-normalized
    // ratios; the all-clutter partition contributes an empty product of one.
    let log_mu = mu.ln();
    let log_tilde: Vec<f64> = partitions
        .iter()
        .map(|p| {
            p.subsets()
                .iter()
                .map(|w| {
                    floor_log(
                        log_mu + cache.get(w).expect("cached").log_dw - tilde_adjustment(w, sensors),
                    )
                })
                .sum()
        })
        .collect();
    let denom = log_sum_exp(&log_tilde);
    if denom == f64::NEG_INFINITY {
        return Err(Error::InfeasibleUpdate);
    }
    let log_alpha_p: Vec<f64> = log_tilde.iter().map(|l| l - denom).collect();

    let mut posterior = r.scaled(mu * gamma);
    let mut coefficients: BTreeMap<MeasurementSubset, f64> = BTreeMap::new();
    for (p, log_a) in partitions.iter().zip(&log_alpha_p) {
        let a = log_a.exp();
        if a <= 0.0 {
            continue;
        }
        for w in p.subsets() {
            *coefficients.entry(w.clone()).or_insert(0.0) += a;
        }
    }
    for (w, &c) in &coefficients {
        if c <= 0.0 {
            continue;
        }
        let gm = cache.get(w).expect("cached").posterior()?;
        posterior.components.extend(gm.scaled(c).components);
    }

    let log_kappa = partitions
        .iter()
        .map(|p| compute_log_kappa(p, sensors, &frame.sizes()))
        .collect::<Result<Vec<_>>>()?;
    let details = UpdateDetails {
        gamma,
        alpha0: mu,
        log_alpha_p,
        log_kappa,
        partitions,
        subset_log_dw: cache.iter().map(|(w, s)| (w.clone(), s.log_dw)).collect(),
        raw_posterior: posterior.clone(),
        raw_cardinality: None,
    };

    let reduced = prune_merge_cap(&posterior, &config.reduction);
    let n_hat = (posterior.total_weight().round().max(0.0) as usize).max(1);
    let capped = cap_components(&reduced, 4 * n_hat);
    Ok((FilterState { phd: capped, cardinality: None }, details))
}

/// Elementary symmetric polynomials `e_0..e_n` of the given values, via
/// the standard one-pass recurrence. `e_0 = 1`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=(i + 1)).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

/// Log-domain elementary symmetric polynomials of values given in log
/// form; immune to overflow when the values span many decades.
pub fn log_elementary_symmetric(log_values: &[f64]) -> Vec<f64> {
    let mut e = vec![f64::NEG_INFINITY; log_values.len() + 1];
    e[0] = 0.0;
    for (i, &lv) in log_values.iter().enumerate() {
        for k in (1..=(i + 1)).rev() {
            e[k] = logaddexp(e[k], lv + e[k - 1]);
        }
    }
    e
}

/// Exact single-sensor CPHD update, with the partition sums collapsed to
/// elementary symmetric functions of the per-measurement likelihood
/// ratios. Agrees with the general update specialized to one sensor.
///
/// No mixture reduction is applied; callers fold it with reduction between
/// sensors as needed.
pub fn single_sensor_cphd_update(
    predicted: &FilterState,
    measurements: &[DVector<f64>],
    sensor: &SensorModel,
) -> Result<FilterState> {
    let card_pred = predicted
        .cardinality
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("CPHD update needs a cardinality distribution".into()))?;
    let gamma = sensor.miss_prob();
    let r = predicted.phd.normalized();
    let m = measurements.len();

    let frame = MeasurementFrame::new(vec![measurements.to_vec()]);
    let sensors = std::slice::from_ref(sensor);
    let stats: Vec<SubsetStats> = (0..m)
        .map(|l| {
            subset_stats(
                &r,
                &MeasurementSubset::singleton(MeasurementIndex::new(0, l)),
                &frame,
                sensors,
            )
        })
        .collect::<Result<_>>()?;
    let log_d: Vec<f64> = stats.iter().map(|s| s.log_dw).collect();
    let log_e = log_elementary_symmetric(&log_d);

    let log_c =
        |v: usize| log_clutter_pgf_derivative_at_zero(&sensor.clutter.kind, v);
    let log_m_deriv = |v: usize| log_pgf_derivative(card_pred, v, gamma);

    let denom_terms: Vec<f64> = (0..=m).map(|k| log_c(m - k) + log_m_deriv(k) + log_e[k]).collect();
    let denom = log_sum_exp(&denom_terms);
    if denom == f64::NEG_INFINITY {
        return Err(Error::InfeasibleUpdate);
    }

    let alpha0_terms: Vec<f64> =
        (0..=m).map(|k| log_c(m - k) + log_m_deriv(k + 1) + log_e[k]).collect();
    let alpha0 = (log_sum_exp(&alpha0_terms) - denom).exp();

    let mut posterior = r.scaled(alpha0 * gamma);
    for l in 0..m {
        if log_d[l] == f64::NEG_INFINITY {
            continue;
        }
        let without: Vec<f64> = log_d
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != l)
            .map(|(_, &d)| d)
            .collect();
        let log_e_wo = log_elementary_symmetric(&without);
        let coef_terms: Vec<f64> = (0..m)
            .map(|k| log_c(m - 1 - k) + log_m_deriv(k + 1) + log_e_wo[k])
            .collect();
        let coef = (log_d[l] + log_sum_exp(&coef_terms) - denom).exp();
        if coef <= 0.0 {
            continue;
        }
        posterior.components.extend(stats[l].posterior()?.scaled(coef).components);
    }

    // Cardinality update for one sensor: kappa collapses to the clutter
    // derivative of the unassigned count.
    let mut log_num = vec![f64::NEG_INFINITY; card_pred.n_max() + 1];
    for (n, num) in log_num.iter_mut().enumerate() {
        let terms: Vec<f64> = (0..=n.min(m))
            .map(|k| {
                let power = (n - k) as f64;
                let gamma_term = if n == k {
                    0.0
                } else if gamma == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    power * gamma.ln()
                };
                log_c(m - k) + ln_falling_factorial(n, k) + gamma_term + log_e[k]
            })
            .collect();
        *num = log_sum_exp(&terms);
    }
    let max = log_num.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::InfeasibleUpdate);
    }
    let probs: Vec<f64> = card_pred
        .probs()
        .iter()
        .zip(&log_num)
        .map(|(&p, &l)| if p > 0.0 { p * (l - max).exp() } else { 0.0 })
        .collect();
    if probs.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InfeasibleUpdate);
    }
    let card_post = CardinalityDistribution::from_probs(probs);

    let mean_post = mean_cardinality(&card_post);
    let total = posterior.total_weight();
    debug_assert!(
        (total - mean_post).abs() <= 1e-6 * mean_post.max(1.0),
        "posterior mass {total} disagrees with cardinality mean {mean_post}"
    );
    if total > 0.0 {
        posterior.scale_in_place(mean_post / total);
    }
    Ok(FilterState { phd: posterior, cardinality: Some(card_post) })
}

/// Exact single-sensor PHD update (the classic Gaussian-mixture PHD
/// corrector): the s = 1 case of the general PHD update, where the sum
/// over partitions factorizes per measurement.
pub fn single_sensor_phd_update(
    predicted: &FilterState,
    measurements: &[DVector<f64>],
    sensor: &SensorModel,
) -> Result<FilterState> {
    let rate = match &sensor.clutter.kind {
        ClutterKind::Poisson { rate } => *rate,
        ClutterKind::Finite(_) => return Err(Error::NonPoissonClutter),
    };
    let log_pd = sensor.detection_prob.ln();
    let log_clutter_intensity = floor_log(rate.ln() + sensor.log_clutter_density());

    let mut posterior = predicted.phd.scaled(sensor.miss_prob());
    for z in measurements {
        let mut updated: Vec<GaussianComponent> = Vec::with_capacity(predicted.phd.len());
        let mut log_weights: Vec<f64> = Vec::with_capacity(predicted.phd.len());
        for comp in &predicted.phd.components {
            match sensor.update_component_log(comp, z) {
                Ok((post, log_marginal)) => {
                    let lw = if comp.weight > 0.0 {
                        floor_log(log_pd + comp.weight.ln() + log_marginal)
                    } else {
                        f64::NEG_INFINITY
                    };
                    log_weights.push(lw);
                    updated.push(post);
                }
                Err(err) => log::debug!("component skipped in PHD update: {err}"),
            }
        }
        let log_signal = log_sum_exp(&log_weights);
        let log_denom = logaddexp(log_clutter_intensity, log_signal);
        if log_denom == f64::NEG_INFINITY {
            continue;
        }
        for (comp, lw) in updated.into_iter().zip(log_weights) {
            posterior.push(comp.with_weight((lw - log_denom).exp()));
        }
    }
    Ok(FilterState { phd: posterior, cardinality: None })
}

/// Iterated-corrector CPHD: folds the single-sensor CPHD update over the
/// sensors in their configured order, pruning and merging between sensors.
/// The result depends on the sensor order.
pub fn ic_cphd_update(
    predicted: &FilterState,
    frame: &MeasurementFrame,
    config: &FilterConfig,
) -> Result<FilterState> {
    let mut state = predicted.clone();
    for (j, sensor) in config.sensors.iter().enumerate() {
        state = single_sensor_cphd_update(&state, &frame.per_sensor[j], sensor)?;
        state.phd = prune_merge_cap(&state.phd, &config.reduction);
    }
    let n_hat = state.cardinality.as_ref().map(map_cardinality).unwrap_or(0).max(1);
    state.phd = cap_components(&state.phd, 4 * n_hat);
    Ok(state)
}

/// Iterated-corrector PHD baseline.
pub fn ic_phd_update(
    predicted: &FilterState,
    frame: &MeasurementFrame,
    config: &FilterConfig,
) -> Result<FilterState> {
    let mut state = FilterState { phd: predicted.phd.clone(), cardinality: None };
    for (j, sensor) in config.sensors.iter().enumerate() {
        state = single_sensor_phd_update(&state, &frame.per_sensor[j], sensor)?;
        state.phd = prune_merge_cap(&state.phd, &config.reduction);
    }
    let n_hat = (state.phd.total_weight().round().max(0.0) as usize).max(1);
    state.phd = cap_components(&state.phd, 4 * n_hat);
    Ok(state)
}

/// Target-count and state estimates.
///
/// PHD filters round the total mixture weight to the nearest integer;
/// CPHD filters take the peak of the posterior cardinality. The estimates
/// are the means of the heaviest components, fewer if the mixture is
/// smaller than the count estimate.
pub fn extract_estimates(state: &FilterState, mode: FilterMode) -> (usize, Vec<DVector<f64>>) {
    let n_hat = if mode.propagates_cardinality() {
        state
            .cardinality
            .as_ref()
            .map(map_cardinality)
            .unwrap_or_else(|| state.phd.total_weight().round().max(0.0) as usize)
    } else {
        state.phd.total_weight().round().max(0.0) as usize
    };
    let mut order: Vec<usize> = (0..state.phd.len()).collect();
    order.sort_by(|&a, &b| {
        state.phd.components[b]
            .weight
            .total_cmp(&state.phd.components[a].weight)
    });
    let estimates = order
        .into_iter()
        .take(n_hat)
        .map(|i| state.phd.components[i].mean.clone())
        .collect();
    (n_hat, estimates)
}
