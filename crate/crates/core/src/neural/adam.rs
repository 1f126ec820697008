//! Adaptive-moment optimizer with global gradient-norm clipping.

use indexmap::IndexMap;
use ndarray::Array2;

use super::config::TrainingConfig;
use super::params::ParamStore;
use crate::error::{Error, Result};

/// Rescales all trainable gradients in place so their global L2 norm is at
/// most `clip_norm`; returns the pre-clip norm. Non-finite gradients abort
/// with the offending parameter's name.
pub fn clip_gradients(store: &mut ParamStore, clip_norm: f64) -> Result<f64> {
    let mut squared_norm = 0.0;
    for p in store.iter() {
        if !p.trainable {
            continue;
        }
        for &gv in p.grad.iter() {
            if !gv.is_finite() {
                return Err(Error::NonFiniteGradient(p.name.clone()));
            }
            squared_norm += gv * gv;
        }
    }
    let norm = squared_norm.sqrt();
    if norm > clip_norm && norm > 0.0 {
        let scale = clip_norm / norm;
        for p in store.iter_mut() {
            if p.trainable {
                p.grad.mapv_inplace(|g| g * scale);
            }
        }
    }
    Ok(norm)
}

pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: f64,
    step_count: u64,
    first_moment: IndexMap<String, Array2<f64>>,
    second_moment: IndexMap<String, Array2<f64>>,
}

impl Adam {
    pub fn new(config: &TrainingConfig) -> Adam {
        Adam {
            learning_rate: config.learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: config.gradient_clip_norm,
            step_count: 0,
            first_moment: IndexMap::new(),
            second_moment: IndexMap::new(),
        }
    }

    /// Clips the accumulated gradients and applies one bias-corrected
    /// adaptive-moment update to every trainable parameter.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<()> {
        clip_gradients(store, self.clip_norm)?;

        self.step_count += 1;
        let bias1 = 1.0 - self.beta1.powi(self.step_count as i32);
        let bias2 = 1.0 - self.beta2.powi(self.step_count as i32);

        for p in store.iter_mut() {
            if !p.trainable {
                continue;
            }
            let m = self
                .first_moment
                .entry(p.name.clone())
                .or_insert_with(|| Array2::zeros(p.value.dim()));
            let v = self
                .second_moment
                .entry(p.name.clone())
                .or_insert_with(|| Array2::zeros(p.value.dim()));
            ndarray::Zip::from(&mut p.value)
                .and(m)
                .and(v)
                .and(&p.grad)
                .for_each(|value, m, v, &grad| {
                    *m = self.beta1 * *m + (1.0 - self.beta1) * grad;
                    *v = self.beta2 * *v + (1.0 - self.beta2) * grad * grad;
                    let m_hat = *m / bias1;
                    let v_hat = *v / bias2;
                    *value -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                });
        }
        Ok(())
    }

    pub fn steps_taken(&self) -> u64 {
        self.step_count
    }
}
