//! Small numeric helpers shared across the filter implementations.

use nalgebra::DMatrix;

/// Log quantities below this floor are treated as minus infinity.
pub const LOG_FLOOR: f64 = -745.0;

/// Clamps a log-domain value to the representable range.
#[inline]
pub fn floor_log(x: f64) -> f64 {
    if x < LOG_FLOOR {
        f64::NEG_INFINITY
    } else {
        x
    }
}

/// Computes `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Computes `log(sum(exp(values)))` in a numerically stable way.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Converts log weights to normalized linear weights summing to one.
pub fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(log_weights);
    log_weights.iter().map(|w| (w - lse).exp()).collect()
}

/// ln(n!)
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// ln(n! / (n-k)!) for k <= n, the falling factorial in log form.
pub fn ln_falling_factorial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ((n - k + 1)..=n).map(|j| (j as f64).ln()).sum()
}

/// ln of the binomial coefficient C(n, k).
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_falling_factorial(n, k) - ln_factorial(k)
}

/// `base^exp` with the convention `0^0 = 1`, avoiding NaN from `0 * ln 0`.
#[inline]
pub fn pow_conv(base: f64, exp: u32) -> f64 {
    if exp == 0 {
        1.0
    } else {
        base.powi(exp as i32)
    }
}

/// Returns `(m + m^T) / 2`, killing asymmetry drift after updates.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}
