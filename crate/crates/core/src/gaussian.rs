//! Weighted Gaussian components and mixtures.
//!
//! Provides the single-component operations the filters are built from:
//! density evaluation, linear (Kalman) and unscented measurement updates
//! with their marginal likelihoods, motion prediction, and mixture
//! reduction (prune / merge / cap).

use nalgebra::{Cholesky, DMatrix, DVector, Vector2};

use crate::linalg::symmetrize;
use crate::{Error, Result};

/// One weighted Gaussian term of a PHD mixture.
#[derive(Debug, Clone)]
pub struct GaussianComponent {
    /// Nonnegative weight; the expected target count carried by this term.
    pub weight: f64,
    pub mean: DVector<f64>,
    /// Symmetric positive-definite covariance.
    pub covariance: DMatrix<f64>,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: DVector<f64>, covariance: DMatrix<f64>) -> Self {
        debug_assert!(weight >= 0.0);
        debug_assert_eq!(mean.len(), covariance.nrows());
        debug_assert_eq!(covariance.nrows(), covariance.ncols());
        Self { weight, mean, covariance }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Planar position, taken as the first two state coordinates.
    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.mean[0], self.mean[1])
    }

    pub fn with_weight(&self, weight: f64) -> Self {
        Self { weight, mean: self.mean.clone(), covariance: self.covariance.clone() }
    }
}

/// An ordered list of weighted Gaussian components representing a
/// (possibly unnormalized) PHD over the single-target state space.
#[derive(Debug, Clone, Default)]
pub struct GaussianMixture {
    pub components: Vec<GaussianComponent>,
}

impl GaussianMixture {
    pub fn empty() -> Self {
        Self { components: Vec::new() }
    }

    pub fn from_components(components: Vec<GaussianComponent>) -> Self {
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn push(&mut self, component: GaussianComponent) {
        self.components.push(component);
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Returns a copy with weights scaled so they sum to one.
    ///
    /// An empty or zero-weight mixture is returned unchanged.
    pub fn normalized(&self) -> Self {
        let total = self.total_weight();
        if total <= 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / total)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| c.with_weight(c.weight * factor))
                .collect(),
        }
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for c in &mut self.components {
            c.weight *= factor;
        }
    }

    /// Evaluates the mixture density (weighted sum of Gaussians) at `x`.
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        let mut total = 0.0;
        for c in &self.components {
            total += c.weight * eval_gaussian(x, &c.mean, &c.covariance)?;
        }
        Ok(total)
    }
}

/// Linear-Gaussian observation model `z = H x + w`, `w ~ N(0, R)`.
#[derive(Debug, Clone)]
pub struct LinearObservationModel {
    pub obs_matrix: DMatrix<f64>,
    pub noise_cov: DMatrix<f64>,
}

impl LinearObservationModel {
    pub fn new(obs_matrix: DMatrix<f64>, noise_cov: DMatrix<f64>) -> Self {
        debug_assert_eq!(obs_matrix.nrows(), noise_cov.nrows());
        Self { obs_matrix, noise_cov }
    }

    /// Sensor observing the planar position (first two state coordinates)
    /// with independent Gaussian noise per axis.
    pub fn position_sensor(state_dim: usize, noise_std: [f64; 2]) -> Self {
        let mut h = DMatrix::zeros(2, state_dim);
        h[(0, 0)] = 1.0;
        h[(1, 1)] = 1.0;
        let r = DMatrix::from_diagonal(&DVector::from_vec(vec![
            noise_std[0] * noise_std[0],
            noise_std[1] * noise_std[1],
        ]));
        Self::new(h, r)
    }
}

/// Bearing (angle-only) observation model. Measurements are the
/// four-quadrant angle from the sensor to the target in degrees, in
/// `[0, 360)`, with additive Gaussian noise of `noise_std_deg` degrees.
#[derive(Debug, Clone)]
pub struct BearingObservationModel {
    pub sensor_position: Vector2<f64>,
    pub noise_std_deg: f64,
}

impl BearingObservationModel {
    pub fn new(sensor_position: Vector2<f64>, noise_std_deg: f64) -> Self {
        debug_assert!(noise_std_deg > 0.0);
        Self { sensor_position, noise_std_deg }
    }

    /// Noise-free bearing of a state, in degrees wrapped to `[0, 360)`.
    pub fn bearing_deg(&self, state: &DVector<f64>) -> f64 {
        let dy = state[1] - self.sensor_position[1];
        let dx = state[0] - self.sensor_position[0];
        wrap_deg_360(dy.atan2(dx).to_degrees())
    }
}

/// Linear-Gaussian motion model `x' = F x + eta`, `eta ~ N(0, Q)`.
#[derive(Debug, Clone)]
pub struct MotionModel {
    pub transition: DMatrix<f64>,
    pub process_noise: DMatrix<f64>,
}

impl MotionModel {
    pub fn new(transition: DMatrix<f64>, process_noise: DMatrix<f64>) -> Self {
        Self { transition, process_noise }
    }

    /// Discretized nearly-constant-velocity model on the state
    /// `[x, y, vx, vy]` with sampling period `dt` and process noise
    /// intensity `sigma` (continuous white acceleration).
    pub fn nearly_constant_velocity(dt: f64, sigma: f64) -> Self {
        let f = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, dt, 0.0, //
                0.0, 1.0, 0.0, dt, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        let t3 = dt * dt * dt / 3.0;
        let t2 = dt * dt / 2.0;
        let q = sigma
            * sigma
            * DMatrix::from_row_slice(
                4,
                4,
                &[
                    t3, 0.0, t2, 0.0, //
                    0.0, t3, 0.0, t2, //
                    t2, 0.0, dt, 0.0, //
                    0.0, t2, 0.0, dt,
                ],
            );
        Self::new(f, q)
    }

    /// Random walk on a `dim`-dimensional state with isotropic step noise.
    pub fn random_walk(dim: usize, sigma: f64) -> Self {
        Self::new(
            DMatrix::identity(dim, dim),
            DMatrix::identity(dim, dim) * (sigma * sigma),
        )
    }
}

/// Sigma-point spread parameters for the unscented transform.
#[derive(Debug, Clone, Copy)]
pub struct UnscentedParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UnscentedParams {
    fn default() -> Self {
        Self { alpha: 0.1, beta: 2.0, kappa: 0.0 }
    }
}

/// Thresholds for mixture reduction.
#[derive(Debug, Clone, Copy)]
pub struct ReductionParams {
    /// Components with weight below this are removed.
    pub prune_threshold: f64,
    /// Squared Mahalanobis distance under which components are merged.
    pub merge_threshold: f64,
    /// Hard cap on the number of components kept.
    pub max_components: usize,
}

impl Default for ReductionParams {
    fn default() -> Self {
        Self { prune_threshold: 1e-5, merge_threshold: 4.0, max_components: 100 }
    }
}

impl ReductionParams {
    /// Parameters under which reduction is the identity.
    pub fn none() -> Self {
        Self { prune_threshold: 0.0, merge_threshold: 0.0, max_components: usize::MAX }
    }
}

/// Wraps an angle in degrees to `[-180, 180)`.
#[inline]
pub fn wrap_deg_180(a: f64) -> f64 {
    let mut r = (a + 180.0).rem_euclid(360.0) - 180.0;
    if r >= 180.0 {
        r -= 360.0;
    }
    r
}

/// Wraps an angle in degrees to `[0, 360)`.
#[inline]
pub fn wrap_deg_360(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Multivariate normal density `N(x; mean, cov)`.
pub fn eval_gaussian(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    Ok(log_gaussian(x, mean, cov)?.exp())
}

/// Log of the multivariate normal density, via Cholesky factorization.
pub fn log_gaussian(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    debug_assert_eq!(x.len(), mean.len());
    debug_assert_eq!(mean.len(), cov.nrows());
    let chol = Cholesky::new(cov.clone()).ok_or(Error::SingularCovariance)?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let diff = x - mean;
    let solved = chol.solve(&diff);
    let maha = diff.dot(&solved);
    let d = x.len() as f64;
    Ok(-0.5 * (d * (2.0 * std::f64::consts::PI).ln() + log_det + maha))
}

/// Propagates one component through the motion model with survival
/// probability `p_sv`: weight is thinned, mean and covariance follow the
/// linear-Gaussian prediction.
pub fn component_predict(
    comp: &GaussianComponent,
    model: &MotionModel,
    p_sv: f64,
) -> GaussianComponent {
    let mean = &model.transition * &comp.mean;
    let cov = &model.transition * &comp.covariance * model.transition.transpose()
        + &model.process_noise;
    GaussianComponent::new(comp.weight * p_sv, mean, symmetrize(&cov))
}

/// Conjugate-Gaussian measurement update of a single component.
///
/// Returns the updated component (weight unchanged; weight bookkeeping is
/// the caller's job) and the marginal likelihood
/// `N(z; H m, H P H' + R)` of the measurement.
pub fn kalman_component_update(
    comp: &GaussianComponent,
    model: &LinearObservationModel,
    z: &DVector<f64>,
) -> Result<(GaussianComponent, f64)> {
    let (updated, log_marginal) = kalman_update_log(comp, model, z)?;
    Ok((updated, log_marginal.exp()))
}

/// Kalman update returning the marginal likelihood in log form, used when
/// chaining updates over several sensors.
pub fn kalman_update_log(
    comp: &GaussianComponent,
    model: &LinearObservationModel,
    z: &DVector<f64>,
) -> Result<(GaussianComponent, f64)> {
    let h = &model.obs_matrix;
    debug_assert_eq!(h.ncols(), comp.dim());
    debug_assert_eq!(h.nrows(), z.len());
    let z_pred = h * &comp.mean;
    let innovation = z - &z_pred;
    let hp = h * &comp.covariance;
    let s = symmetrize(&(&hp * h.transpose() + &model.noise_cov));

    let chol = Cholesky::new(s.clone()).ok_or(Error::SingularCovariance)?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let solved = chol.solve(&innovation);
    let maha = innovation.dot(&solved);
    let m = z.len() as f64;
    let log_marginal = -0.5 * (m * (2.0 * std::f64::consts::PI).ln() + log_det + maha);

    // K = P H' S^{-1}; computed as (S^{-1} (H P))' since P is symmetric.
    let gain = chol.solve(&hp).transpose();
    let mean = &comp.mean + &gain * innovation;
    let cov = symmetrize(&(&comp.covariance - &gain * hp));
    Ok((GaussianComponent::new(comp.weight, mean, cov), log_marginal))
}

/// Unscented update of a component against a scalar measurement function.
///
/// `h` maps a state vector to the scalar predicted measurement and
/// `residual(z, z_pred)` computes the innovation (a plain subtraction for
/// linear measurements, a wrapped difference for angles). The predicted
/// measurement statistics are moment-matched over the sigma points, with
/// transformed values expressed relative to the center point so that the
/// residual convention also governs averaging of wrapped quantities.
///
/// Returns the updated component and the log marginal likelihood of the
/// innovation under its predicted scalar variance.
pub fn unscented_scalar_update(
    comp: &GaussianComponent,
    h: impl Fn(&DVector<f64>) -> f64,
    residual: impl Fn(f64, f64) -> f64,
    z: f64,
    noise_var: f64,
    params: &UnscentedParams,
) -> Result<(GaussianComponent, f64)> {
    if !(params.alpha > 0.0 && params.alpha <= 1.0) {
        return Err(Error::InvalidConfig("unscented alpha must be in (0, 1]".into()));
    }
    let n = comp.dim();
    let nf = n as f64;
    let lambda = params.alpha * params.alpha * (nf + params.kappa) - nf;
    let scale = nf + lambda;
    if scale <= 0.0 {
        return Err(Error::InvalidConfig("unscented scaling n + lambda must be positive".into()));
    }

    let chol = Cholesky::new(comp.covariance.clone() * scale).ok_or(Error::SingularCovariance)?;
    let root = chol.l();

    let mut points = Vec::with_capacity(2 * n + 1);
    points.push(comp.mean.clone());
    for i in 0..n {
        let col = root.column(i).into_owned();
        points.push(&comp.mean + &col);
        points.push(&comp.mean - &col);
    }

    let w0_mean = lambda / scale;
    let w0_cov = w0_mean + 1.0 - params.alpha * params.alpha + params.beta;
    let wi = 0.5 / scale;
    let weight_mean = |i: usize| if i == 0 { w0_mean } else { wi };
    let weight_cov = |i: usize| if i == 0 { w0_cov } else { wi };

    // Transformed points relative to the center point, so wrapped
    // quantities average correctly.
    let z_ref = h(&points[0]);
    let deltas: Vec<f64> = points.iter().map(|p| residual(h(p), z_ref)).collect();

    let mean_delta: f64 = deltas.iter().enumerate().map(|(i, d)| weight_mean(i) * d).sum();
    let z_pred = z_ref + mean_delta;

    let mut s = noise_var;
    let mut cross = DVector::zeros(n);
    for (i, p) in points.iter().enumerate() {
        let dz = deltas[i] - mean_delta;
        let dx = p - &comp.mean;
        s += weight_cov(i) * dz * dz;
        cross += weight_cov(i) * dz * dx;
    }
    if s <= 0.0 {
        return Err(Error::SingularCovariance);
    }

    let innovation = residual(z, z_pred);
    let gain = cross / s;
    let mean = &comp.mean + &gain * innovation;
    let cov = symmetrize(&(&comp.covariance - (&gain * gain.transpose()) * s));
    let log_marginal =
        -0.5 * ((2.0 * std::f64::consts::PI * s).ln() + innovation * innovation / s);
    Ok((GaussianComponent::new(comp.weight, mean, cov), log_marginal))
}

/// Unscented measurement update against a bearing sensor.
///
/// `z_deg` is a bearing in `[0, 360)` degrees; the innovation is wrapped to
/// `[-180, 180)` before use.
pub fn ut_component_update(
    comp: &GaussianComponent,
    model: &BearingObservationModel,
    z_deg: f64,
    params: &UnscentedParams,
) -> Result<(GaussianComponent, f64)> {
    let (updated, log_marginal) = ut_update_log(comp, model, z_deg, params)?;
    Ok((updated, log_marginal.exp()))
}

pub fn ut_update_log(
    comp: &GaussianComponent,
    model: &BearingObservationModel,
    z_deg: f64,
    params: &UnscentedParams,
) -> Result<(GaussianComponent, f64)> {
    let dx = comp.mean[0] - model.sensor_position[0];
    let dy = comp.mean[1] - model.sensor_position[1];
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::BearingUndefined);
    }
    let noise_var = model.noise_std_deg * model.noise_std_deg;
    unscented_scalar_update(
        comp,
        |state| model.bearing_deg(state),
        |a, b| wrap_deg_180(a - b),
        z_deg,
        noise_var,
        params,
    )
}

/// Prunes low-weight components, merges components in close vicinity of
/// the dominant remaining one, and caps the component count.
///
/// Merging uses the squared Mahalanobis distance with respect to the
/// highest-weight unmerged component; the cap keeps the highest weights,
/// breaking ties by original order. The total weight of the output is
/// rescaled to equal the total weight of the input. If everything is
/// pruned, the empty mixture is returned.
pub fn prune_merge_cap(gm: &GaussianMixture, params: &ReductionParams) -> GaussianMixture {
    let total_in = gm.total_weight();
    let mut alive: Vec<&GaussianComponent> = gm
        .components
        .iter()
        .filter(|c| c.weight >= params.prune_threshold && c.weight > 0.0)
        .collect();
    if alive.is_empty() {
        return GaussianMixture::empty();
    }

    let mut merged: Vec<GaussianComponent> = Vec::new();
    while !alive.is_empty() {
        // Dominant survivor; ties keep the earliest.
        let lead = alive
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.weight.partial_cmp(&b.1.weight).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        let lead_comp = alive[lead];
        let chol = Cholesky::new(lead_comp.covariance.clone());

        let mut cluster = Vec::new();
        let mut rest = Vec::new();
        for (i, c) in alive.iter().enumerate() {
            let close = if i == lead {
                true
            } else if let Some(ch) = &chol {
                let diff = &c.mean - &lead_comp.mean;
                let solved = ch.solve(&diff);
                diff.dot(&solved) <= params.merge_threshold
            } else {
                false
            };
            if close {
                cluster.push(*c);
            } else {
                rest.push(*c);
            }
        }

        merged.push(moment_merge(&cluster));
        alive = rest;
    }

    // Cap: stable sort by weight descending keeps original order on ties.
    merged.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap());
    merged.truncate(params.max_components);

    let mut out = GaussianMixture::from_components(merged);
    let total_out = out.total_weight();
    if total_out > 0.0 {
        out.scale_in_place(total_in / total_out);
    }
    out
}

fn moment_merge(cluster: &[&GaussianComponent]) -> GaussianComponent {
    let w: f64 = cluster.iter().map(|c| c.weight).sum();
    let dim = cluster[0].dim();
    let mut mean = DVector::zeros(dim);
    for c in cluster {
        mean += c.weight * &c.mean;
    }
    mean /= w;
    let mut cov = DMatrix::zeros(dim, dim);
    for c in cluster {
        let d = &mean - &c.mean;
        cov += c.weight * (&c.covariance + &d * d.transpose());
    }
    cov /= w;
    GaussianComponent::new(w, mean, symmetrize(&cov))
}
