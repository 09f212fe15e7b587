//! Finite cardinality distributions and their generating-function
//! derivatives.
//!
//! The CPHD recursion needs the v-th derivatives of two probability
//! generating functions: `M(t)` of the predicted cardinality distribution
//! (evaluated at the miss probability) and `C(t)` of each sensor's clutter
//! cardinality distribution (evaluated at zero). Both are exact finite sums
//! here since distributions are truncated at a maximum count.

use serde::{Deserialize, Serialize};

use crate::linalg::{ln_binomial, ln_factorial, ln_falling_factorial, log_sum_exp, pow_conv};

/// Probability vector over target counts `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityDistribution {
    probs: Vec<f64>,
}

impl CardinalityDistribution {
    /// Builds a distribution from raw nonnegative masses, normalizing them.
    pub fn from_probs(probs: Vec<f64>) -> Self {
        assert!(!probs.is_empty(), "cardinality distribution needs at least p(0)");
        assert!(probs.iter().all(|&p| p >= 0.0), "negative probability mass");
        let total: f64 = probs.iter().sum();
        assert!(total > 0.0, "cardinality distribution has no mass");
        Self { probs: probs.into_iter().map(|p| p / total).collect() }
    }

    /// Point mass at `n`, truncated at `n_max`.
    pub fn delta(n: usize, n_max: usize) -> Self {
        assert!(n <= n_max);
        let mut probs = vec![0.0; n_max + 1];
        probs[n] = 1.0;
        Self { probs }
    }

    /// Poisson distribution with the given mean, truncated to `0..=n_max`
    /// and renormalized.
    pub fn truncated_poisson(mean: f64, n_max: usize) -> Self {
        assert!(mean >= 0.0);
        if mean == 0.0 {
            return Self::delta(0, n_max);
        }
        let probs = (0..=n_max)
            .map(|n| (n as f64 * mean.ln() - mean - ln_factorial(n)).exp())
            .collect();
        Self::from_probs(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Returns a copy truncated or zero-padded to the new `n_max`,
    /// renormalized.
    pub fn resized(&self, n_max: usize) -> Self {
        let mut probs = self.probs.clone();
        probs.resize(n_max + 1, 0.0);
        Self::from_probs(probs)
    }
}

/// Clutter count model of one sensor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ClutterKind {
    /// Poisson-distributed clutter count with the given rate.
    Poisson { rate: f64 },
    /// Arbitrary finite clutter count distribution.
    Finite(CardinalityDistribution),
}

/// Spatial density of clutter, uniform over its support.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum ClutterSpatial {
    /// Uniform over a rectangle of the given area (density `1 / area`).
    UniformRect { area: f64 },
    /// Uniform over bearings in `[0, 360)` degrees (density `1 / 360`).
    UniformAngleDeg,
}

impl ClutterSpatial {
    pub fn density(&self) -> f64 {
        match self {
            ClutterSpatial::UniformRect { area } => 1.0 / area,
            ClutterSpatial::UniformAngleDeg => 1.0 / 360.0,
        }
    }

    pub fn log_density(&self) -> f64 {
        self.density().ln()
    }
}

/// Clutter process of one sensor: count distribution plus uniform spatial
/// density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClutterModel {
    pub kind: ClutterKind,
    pub spatial: ClutterSpatial,
}

impl ClutterModel {
    pub fn poisson_rect(rate: f64, area: f64) -> Self {
        Self { kind: ClutterKind::Poisson { rate }, spatial: ClutterSpatial::UniformRect { area } }
    }

    pub fn poisson_bearing(rate: f64) -> Self {
        Self { kind: ClutterKind::Poisson { rate }, spatial: ClutterSpatial::UniformAngleDeg }
    }
}

/// v-th derivative of the PGF `M(t) = sum_n t^n p(n)` evaluated at
/// `t` in `[0, 1]`:
///
/// `M^(v)(t) = sum_{n >= v} n!/(n-v)! t^(n-v) p(n)`
///
/// Returns 0 when `v` exceeds the support.
pub fn pgf_derivative(dist: &CardinalityDistribution, order: usize, point: f64) -> f64 {
    log_pgf_derivative(dist, order, point).exp()
}

/// Log-domain variant of [`pgf_derivative`], used inside the update where
/// the derivative enters products of many small and large factors.
pub fn log_pgf_derivative(dist: &CardinalityDistribution, order: usize, point: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&point));
    let probs = dist.probs();
    if order > dist.n_max() {
        return f64::NEG_INFINITY;
    }
    let log_t = point.ln();
    let terms: Vec<f64> = (order..probs.len())
        .filter(|&n| probs[n] > 0.0)
        .map(|n| {
            let power = (n - order) as f64;
            let t_term = if n == order { 0.0 } else { power * log_t };
            ln_falling_factorial(n, order) + t_term + probs[n].ln()
        })
        .collect();
    log_sum_exp(&terms)
}

/// v-th derivative of the clutter-count PGF at zero.
///
/// For a Poisson count with rate `lambda` this is `lambda^v e^{-lambda}`;
/// for a finite distribution it is `v! p(v)`.
pub fn clutter_pgf_derivative_at_zero(kind: &ClutterKind, order: usize) -> f64 {
    log_clutter_pgf_derivative_at_zero(kind, order).exp()
}

pub fn log_clutter_pgf_derivative_at_zero(kind: &ClutterKind, order: usize) -> f64 {
    match kind {
        ClutterKind::Poisson { rate } => {
            if order == 0 {
                -rate
            } else if *rate == 0.0 {
                f64::NEG_INFINITY
            } else {
                order as f64 * rate.ln() - rate
            }
        }
        ClutterKind::Finite(dist) => {
            if order > dist.n_max() || dist.probs()[order] == 0.0 {
                f64::NEG_INFINITY
            } else {
                ln_factorial(order) + dist.probs()[order].ln()
            }
        }
    }
}

/// Predicts the cardinality distribution through one time step: binomial
/// thinning of the posterior with survival fraction `phi`, convolved with
/// the birth cardinality, truncated to the larger of the two supports and
/// renormalized.
pub fn predict_cardinality(
    posterior: &CardinalityDistribution,
    phi: f64,
    birth: &CardinalityDistribution,
) -> CardinalityDistribution {
    let (dist, lost) = predict_cardinality_with_loss(posterior, phi, birth);
    if lost > 1e-9 {
        log::warn!("cardinality prediction truncated {lost:.3e} probability mass");
    }
    dist
}

/// As [`predict_cardinality`], additionally returning the probability mass
/// that fell above the truncation point and was renormalized away.
pub fn predict_cardinality_with_loss(
    posterior: &CardinalityDistribution,
    phi: f64,
    birth: &CardinalityDistribution,
) -> (CardinalityDistribution, f64) {
    debug_assert!((0.0..=1.0).contains(&phi));
    let n_max = posterior.n_max().max(birth.n_max());

    // Survivor count: sum_l p(l) Binomial(l, phi) placed at j.
    let mut survivors = vec![0.0; posterior.n_max() + 1];
    for (l, &pl) in posterior.probs().iter().enumerate() {
        if pl == 0.0 {
            continue;
        }
        for (j, slot) in survivors.iter_mut().enumerate().take(l + 1) {
            let b = (ln_binomial(l, j)).exp()
                * pow_conv(phi, j as u32)
                * pow_conv(1.0 - phi, (l - j) as u32);
            *slot += pl * b;
        }
    }

    // Convolution with the birth count, without truncation first.
    let full_len = survivors.len() + birth.n_max();
    let mut full = vec![0.0; full_len];
    for (j, &sj) in survivors.iter().enumerate() {
        if sj == 0.0 {
            continue;
        }
        for (b, &pb) in birth.probs().iter().enumerate() {
            full[j + b] += sj * pb;
        }
    }

    let kept: f64 = full.iter().take(n_max + 1).sum();
    let lost: f64 = full.iter().skip(n_max + 1).sum();
    full.truncate(n_max + 1);
    if kept <= 0.0 {
        // Pathological: everything above the truncation point. Park the
        // mass at the top of the support.
        log::warn!("cardinality prediction lost all mass to truncation");
        return (CardinalityDistribution::delta(n_max, n_max), lost);
    }
    (CardinalityDistribution::from_probs(full), lost)
}

/// Expected count under the distribution.
pub fn mean_cardinality(dist: &CardinalityDistribution) -> f64 {
    dist.probs().iter().enumerate().map(|(n, &p)| n as f64 * p).sum()
}

/// Maximum a-posteriori count; ties broken toward the smaller count.
pub fn map_cardinality(dist: &CardinalityDistribution) -> usize {
    let mut best = 0;
    let mut best_p = dist.probs()[0];
    for (n, &p) in dist.probs().iter().enumerate().skip(1) {
        if p > best_p {
            best = n;
            best_p = p;
        }
    }
    best
}
