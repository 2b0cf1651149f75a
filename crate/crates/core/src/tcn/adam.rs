//! Adam optimizer step with bias-corrected moment estimates.

use serde::{Deserialize, Serialize};

/// Adam hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update over a flat parameter slice. `step` is the 1-based step
/// count used for bias correction.
pub fn update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: u64,
    cfg: &AdamParams,
) {
    debug_assert_eq!(params.len(), grads.len());
    let bc1 = 1.0 - cfg.beta1.powi(step as i32);
    let bc2 = 1.0 - cfg.beta2.powi(step as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_roughly_the_learning_rate() {
        let cfg = AdamParams::default();
        let mut p = vec![1.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        update(&mut p, &[0.5], &mut m, &mut v, 1, &cfg);
        // With bias correction the first step magnitude is ~lr.
        assert!((p[0] - (1.0 - 1e-3)).abs() < 1e-6, "{}", p[0]);
    }

    #[test]
    fn zero_learning_rate_leaves_parameters_fixed() {
        let cfg = AdamParams {
            learning_rate: 0.0,
            ..AdamParams::default()
        };
        let mut p = vec![1.0, -2.0];
        let mut m = vec![0.0; 2];
        let mut v = vec![0.0; 2];
        update(&mut p, &[3.0, -1.0], &mut m, &mut v, 1, &cfg);
        assert_eq!(p, vec![1.0, -2.0]);
    }
}
