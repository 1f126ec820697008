//! Training hyperparameters; the seed fixes every stochastic choice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub seed: u64,
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub gradient_clip_norm: f64,
    /// Early-stopping patience in epochs on the dev metric.
    pub patience: usize,
    /// Vocabulary frequency threshold.
    pub min_freq: usize,
    /// Memory-network hop count.
    pub hops: usize,
    /// Longest span considered at decode time.
    pub max_span_len: usize,
    /// Share one encoder between sentence/context and question sides.
    pub share_encoders: bool,
    pub trainable_embeddings: bool,
    /// Train span models on a uniformly sampled answer occurrence each
    /// epoch instead of the fixed first occurrence.
    pub random_span_selection: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            seed: 0,
            embedding_dim: 100,
            hidden_dim: 100,
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 30,
            gradient_clip_norm: 5.0,
            patience: 5,
            min_freq: 1,
            hops: 3,
            max_span_len: 15,
            share_encoders: false,
            trainable_embeddings: true,
            random_span_selection: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("embedding_dim", self.embedding_dim),
            ("hidden_dim", self.hidden_dim),
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
            ("patience", self.patience),
            ("min_freq", self.min_freq),
            ("hops", self.hops),
            ("max_span_len", self.max_span_len),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.gradient_clip_norm.is_nan() || self.gradient_clip_norm <= 0.0 {
            return Err(Error::Config("gradient_clip_norm must be positive".into()));
        }
        Ok(())
    }
}
