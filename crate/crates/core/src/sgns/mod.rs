//! Skip-gram with negative sampling over ticker sentences.
//!
//! The trained input vectors become the company embedding. Training is
//! deterministic for `workers == 1`; with more workers, threads update shared
//! vectors without synchronisation and results depend on scheduling.

mod embedding;
mod model;
mod sampler;
mod train;

pub use embedding::{nearest_neighbors, Embedding, EmbeddingMetadata};
pub use model::{log_sigmoid, sigmoid, ModelState};
pub use sampler::NoiseSampler;
pub use train::{train, train_with_observer, TrainStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SgnsError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("sentence dated {date} has {len} token(s); at least 2 are required")]
    DegenerateSentence { date: chrono::NaiveDate, len: usize },
    #[error("unknown token '{0}'")]
    UnknownToken(String),
    #[error("negative sample '{0}' equals the context token")]
    NegativeIsContext(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite parameter after epoch {epoch}")]
    NonFinite { epoch: usize },
    #[error("embedding file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SgnsError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub dimension: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub alpha: f64,
    pub min_alpha: f64,
    pub seed: u64,
    pub workers: usize,
    pub noise_exponent: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            dimension: 4,
            window: 5,
            negatives: 5,
            epochs: 5,
            alpha: 0.025,
            min_alpha: 0.0001,
            seed: 1,
            workers: 1,
            noise_exponent: 0.75,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SgnsError::InvalidHyperparams(m.to_string()));
        if self.dimension == 0 {
            return bad("dimension must be >= 1");
        }
        if self.window == 0 {
            return bad("window must be >= 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be >= 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if self.workers == 0 {
            return bad("workers must be >= 1");
        }
        if !(self.min_alpha >= 0.0 && self.alpha > self.min_alpha && self.alpha.is_finite()) {
            return bad("learning rates must satisfy alpha > min_alpha >= 0");
        }
        if !self.noise_exponent.is_finite() {
            return bad("noise exponent must be finite");
        }
        Ok(())
    }
}
