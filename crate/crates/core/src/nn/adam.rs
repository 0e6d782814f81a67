//! Adam with bias correction.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::mlp::{GradientBundle, MlpParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self { lr, ..Self::default() }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First/second moment accumulators and the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: GradientBundle,
    pub v: GradientBundle,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        Self { m: GradientBundle::zeros_like(params), v: GradientBundle::zeros_like(params), t: 0 }
    }
}

fn update(theta: &mut Array2<f64>, g: &Array2<f64>, m: &mut Array2<f64>, v: &mut Array2<f64>, cfg: &AdamConfig, c1: f64, c2: f64) {
    ndarray::Zip::from(theta).and(g).and(m).and(v).for_each(|th, &gi, mi, vi| {
        *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
        *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
        let m_hat = *mi / c1;
        let v_hat = *vi / c2;
        *th -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    });
}

/// One Adam update of `params` in place.
pub fn adam_step(params: &mut MlpParams, grads: &GradientBundle, state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    if !grads.matches(params) || !state.m.matches(params) || !state.v.matches(params) {
        return Err(Error::invalid("gradient or optimizer state shape does not match parameters"));
    }
    if !(cfg.lr > 0.0) {
        return Err(Error::invalid(format!("learning rate must be positive, got {}", cfg.lr)));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (i, (w, b)) in params.layers_mut().enumerate() {
        update(w, &grads.weights[i], &mut state.m.weights[i], &mut state.v.weights[i], cfg, c1, c2);
        update(b, &grads.biases[i], &mut state.m.biases[i], &mut state.v.biases[i], cfg, c1, c2);
    }
    Ok(())
}
