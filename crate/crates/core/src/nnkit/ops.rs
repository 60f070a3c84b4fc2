//! Scalar building blocks of the loss graphs and their derivatives.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Bounds applied to predicted log-variances before they enter a density.
pub const LOG_VAR_MIN: f64 = -10.0;
pub const LOG_VAR_MAX: f64 = 10.0;

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(logits);
    logits.iter().map(|z| z - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let total: f64 = out.iter().sum();
    for v in &mut out {
        *v /= total;
    }
    out
}

/// Pulls a gradient on `log_softmax(z)` back to `z`.
pub fn log_softmax_backward(log_probs: &[f64], upstream: &[f64]) -> Vec<f64> {
    let total: f64 = upstream.iter().sum();
    log_probs
        .iter()
        .zip(upstream)
        .map(|(lp, g)| g - lp.exp() * total)
        .collect()
}

/// Entropy `−Σ p log p` of a distribution given by its log-probabilities.
pub fn entropy(log_probs: &[f64]) -> f64 {
    -log_probs
        .iter()
        .map(|&lp| {
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                lp.exp() * lp
            }
        })
        .sum::<f64>()
}

/// d entropy / d log p for each entry.
pub fn entropy_backward(log_probs: &[f64]) -> Vec<f64> {
    log_probs
        .iter()
        .map(|&lp| {
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                -lp.exp() * (lp + 1.0)
            }
        })
        .collect()
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Diagonal Gaussian log-density in two dimensions with the log-variance
/// clamped to `[LOG_VAR_MIN, LOG_VAR_MAX]`.
pub fn gaussian_loglik(y: [f64; 2], mu: [f64; 2], log_var: [f64; 2]) -> Result<f64> {
    if y.iter().chain(&mu).chain(&log_var).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gaussian_loglik input"));
    }
    Ok(-(2.0 * PI).ln() + gaussian_quadratic(y, mu, log_var))
}

/// Data-dependent part of the log-density: `−½ Σ_j [(y−μ)²/σ² + log σ²]`.
pub fn gaussian_quadratic(y: [f64; 2], mu: [f64; 2], log_var: [f64; 2]) -> f64 {
    let mut acc = 0.0;
    for j in 0..2 {
        let lv = log_var[j].clamp(LOG_VAR_MIN, LOG_VAR_MAX);
        let r = y[j] - mu[j];
        acc += r * r * (-lv).exp() + lv;
    }
    -0.5 * acc
}

/// Value of [`gaussian_quadratic`] with its derivatives with respect to
/// `mu` and `log_var`. The clamp passes no gradient outside its range.
pub fn gaussian_quadratic_grad(
    y: [f64; 2],
    mu: [f64; 2],
    log_var: [f64; 2],
) -> (f64, [f64; 2], [f64; 2]) {
    let mut value = 0.0;
    let mut d_mu = [0.0; 2];
    let mut d_lv = [0.0; 2];
    for j in 0..2 {
        let inside = (LOG_VAR_MIN..=LOG_VAR_MAX).contains(&log_var[j]);
        let lv = log_var[j].clamp(LOG_VAR_MIN, LOG_VAR_MAX);
        let prec = (-lv).exp();
        let r = y[j] - mu[j];
        value -= 0.5 * (r * r * prec + lv);
        d_mu[j] = r * prec;
        if inside {
            d_lv[j] = 0.5 * (r * r * prec - 1.0);
        }
    }
    (value, d_mu, d_lv)
}
