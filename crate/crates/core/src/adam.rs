//! Adam optimizer with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state for `dim` parameters with the given learning rate and the
    /// usual moment coefficients (0.9, 0.999, 1e-8).
    pub fn new(dim: usize, learning_rate: f64) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update of `params` against `gradient`, in place.
    pub fn step(&mut self, params: &mut [f64], gradient: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || gradient.len() != self.m.len() {
            return Err(Error::InvalidArgument(format!(
                "adam state holds {} parameters, got params of length {} and gradient of length {}",
                self.m.len(),
                params.len(),
                gradient.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let m_corr = 1.0 - self.beta1.powi(t);
        let v_corr = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = gradient[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / m_corr;
            let v_hat = self.v[i] / v_corr;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut state = AdamState::new(4, 0.05);
        let mut params = vec![0.3, -0.2, 1.5, 0.0];
        let before = params.clone();
        state.step(&mut params, &[0.0; 4]).unwrap();
        assert_eq!(params, before);
    }

    #[test]
    fn first_step_is_symmetric_and_opposes_gradient() {
        let mut state = AdamState::new(3, 0.05);
        let mut params = vec![0.0; 3];
        state.step(&mut params, &[2.0, 2.0, 2.0]).unwrap();
        assert!(params[0] < 0.0);
        assert_abs_diff_eq!(params[0], params[1], epsilon = 0.0);
        assert_abs_diff_eq!(params[1], params[2], epsilon = 0.0);
    }

    #[test]
    fn matches_hand_executed_update_on_quadratic() {
        // Minimize f(x) = x^2 from x = 1 for two steps and compare against
        // the textbook update equations executed independently here.
        let lr = 0.05;
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let mut x_ref = 1.0_f64;
        let (mut m, mut v) = (0.0_f64, 0.0_f64);
        for t in 1..=2 {
            let g = 2.0 * x_ref;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let m_hat = m / (1.0 - b1.powi(t));
            let v_hat = v / (1.0 - b2.powi(t));
            x_ref -= lr * m_hat / (v_hat.sqrt() + eps);
        }

        let mut state = AdamState::new(1, lr);
        let mut params = vec![1.0];
        for _ in 0..2 {
            let g = vec![2.0 * params[0]];
            state.step(&mut params, &g).unwrap();
        }
        assert_abs_diff_eq!(params[0], x_ref, epsilon = 1e-12);
        // Frozen value of the two-step trace for the same start point.
        assert_abs_diff_eq!(params[0], 0.9000832433105465, epsilon = 1e-12);
    }

    #[test]
    fn vanishing_learning_rate_freezes_parameters() {
        let mut state = AdamState::new(2, 1e-12);
        let mut params = vec![0.7, -0.4];
        let before = params.clone();
        for _ in 0..10 {
            state.step(&mut params, &[1.0, -2.0]).unwrap();
        }
        for (p, b) in params.iter().zip(&before) {
            assert!((p - b).abs() < 1e-9);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut state = AdamState::new(2, 0.05);
        let mut params = vec![0.0; 3];
        assert!(state.step(&mut params, &[0.0; 3]).is_err());
        let mut params = vec![0.0; 2];
        assert!(state.step(&mut params, &[0.0; 3]).is_err());
    }
}
