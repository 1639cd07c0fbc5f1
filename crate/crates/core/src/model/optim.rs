use serde::{Deserialize, Serialize};

use super::params::ParamSet;

/// Scales `g` in place to norm `tau` when its L2 norm exceeds `tau`.
/// Returns the norm before clipping.
pub fn clip_slice(g: &mut [f64], tau: f64) -> f64 {
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > tau {
        let k = tau / norm;
        g.iter_mut().for_each(|x| *x *= k);
    }
    norm
}

/// Global-norm clipping across every gradient tensor.
pub fn clip_gradients(grad: &mut ParamSet, tau: f64) -> f64 {
    let norm = grad.squared_norm().sqrt();
    if norm > tau {
        grad.scale(tau / norm);
    }
    norm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias correction. Moments share the parameter layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: ParamSet,
    pub second_moment: ParamSet,
}

impl Adam {
    pub fn new(config: AdamConfig, params: &ParamSet) -> Self {
        Self {
            config,
            step: 0,
            first_moment: params.zeros_like(),
            second_moment: params.zeros_like(),
        }
    }

    pub fn step(&mut self, params: &mut ParamSet, grad: &ParamSet) {
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let bias1 = 1.0 - beta1.powi(self.step as i32);
        let bias2 = 1.0 - beta2.powi(self.step as i32);
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grad.tensors())
            .zip(self.first_moment.tensors_mut())
            .zip(self.second_moment.tensors_mut());
        for (((p, g), m), v) in tensors {
            for k in 0..p.data.len() {
                let gk = g.data[k];
                m.data[k] = beta1 * m.data[k] + (1.0 - beta1) * gk;
                v.data[k] = beta2 * v.data[k] + (1.0 - beta2) * gk * gk;
                let m_hat = m.data[k] / bias1;
                let v_hat = v.data[k] / bias2;
                p.data[k] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
    }
}
