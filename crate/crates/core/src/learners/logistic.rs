use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::error::{Error, Result};

const L2: f64 = 1e-6;
const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 1000;
const DECREMENT_TOL: f64 = 1e-12;

/// `P(y = 1 | x) = sigmoid(intercept + coefficient * x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficient: f64,
}

impl LogisticModel {
    pub fn predict(&self, x: f64) -> f64 {
        sigmoid(self.intercept + self.coefficient * x)
    }
}

pub fn predict_logistic(model: &LogisticModel, x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| model.predict(v)).collect()
}

fn objective(x: &[f64], y: &[u8], b0: f64, b1: f64) -> f64 {
    let ll: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let z = b0 + b1 * xi;
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            f64::from(yi) * z - softplus
        })
        .sum();
    ll - 0.5 * L2 * (b0 * b0 + b1 * b1)
}

/// Maximizes the L2-penalized log-likelihood by damped Newton steps.
pub fn train_logistic(x: &[f64], y: &[u8]) -> Result<LogisticModel> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::invalid("logistic regression needs both classes"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite feature value"));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::invalid("constant feature has no separating direction"));
    }

    // Fit on the standardized feature, then map the parameters back.
    let n = x.len() as f64;
    let center = x.iter().sum::<f64>() / n;
    let scale = (x.iter().map(|v| (v - center).powi(2)).sum::<f64>() / n).sqrt();
    let z: Vec<f64> = x.iter().map(|v| (v - center) / scale).collect();
    let (b0, b1) = newton(&z, y)?;
    Ok(LogisticModel {
        intercept: b0 - b1 * center / scale,
        coefficient: b1 / scale,
    })
}

/// Damped Newton ascent from the origin. Stops when the gradient norm is
/// below tolerance or no step improves the objective in floating point.
fn newton(x: &[f64], y: &[u8]) -> Result<(f64, f64)> {
    let (mut b0, mut b1) = (0.0, 0.0);
    let mut current = objective(x, y, b0, b1);
    let mut grad_norm = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (mut g0, mut g1) = (-L2 * b0, -L2 * b1);
        let (mut h00, mut h01, mut h11) = (L2, 0.0, L2);
        for (&xi, &yi) in x.iter().zip(y) {
            let p = sigmoid(b0 + b1 * xi);
            let r = f64::from(yi) - p;
            g0 += r;
            g1 += r * xi;
            let w = p * (1.0 - p);
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        grad_norm = (g0 * g0 + g1 * g1).sqrt();
        if grad_norm < GRAD_TOL {
            return Ok((b0, b1));
        }
        // Solve (negated Hessian) * step = gradient.
        let det = h00 * h11 - h01 * h01;
        let (mut s0, mut s1) = if det > 0.0 && det.is_finite() {
            ((h11 * g0 - h01 * g1) / det, (h00 * g1 - h01 * g0) / det)
        } else {
            (g0 / h00, g1 / h11)
        };
        // Newton decrement: the predicted objective gain of a full step.
        // Near-separable data drives it to round-off long before the
        // gradient reaches tolerance.
        if 0.5 * (g0 * s0 + g1 * s1) < DECREMENT_TOL {
            return Ok((b0, b1));
        }
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = objective(x, y, b0 + s0, b1 + s1);
            if candidate >= current {
                b0 += s0;
                b1 += s1;
                current = candidate;
                accepted = true;
                break;
            }
            s0 *= 0.5;
            s1 *= 0.5;
        }
        if !accepted {
            return Ok((b0, b1));
        }
    }
    Err(Error::NonConvergence {
        what: "logistic regression",
        iterations: MAX_ITER,
        residual: grad_norm,
    })
}
