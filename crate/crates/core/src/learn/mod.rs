//! Learned operator selection: features, actor-critic, clipped policy-gradient
//! updates, the training loop and non-learning baselines.

mod baselines;
mod checkpoint;
mod features;
mod net;
mod ppo;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::Schedule;

pub use baselines::{baseline_policy, run_baseline, Baseline, BaselineConfig, BaselineReport, Selection, Start};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use features::{extract_features, op_dim, SearchHistory, StateFeatures, StepRecord, NODE_FEATURES};
pub use net::{softmax, ActorCritic, Output, Trace, ACTIONS};
pub use ppo::{advantages, ppo_update, Transition, UpdateStats};
pub use train::{episode_rng, run_episode, train, train_with_net, Episode, TrainReport};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot update from an empty buffer")]
    EmptyBuffer,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible state reached: {0}")]
    AuditFailed(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Maximum number of episodes.
    pub episodes: usize,
    /// Steps per episode; `None` means `50 n`.
    pub steps: Option<usize>,
    pub eps_conv: f64,
    /// Consecutive episodes with a best-cost change below `eps_conv` before stopping.
    pub patience: usize,
    pub gamma: f64,
    pub clip: f64,
    pub lr: f64,
    pub batch: usize,
    pub update_epochs: usize,
    pub value_coef: f64,
    pub normalize_advantages: bool,
    pub k_candidates: usize,
    pub history: usize,
    pub width: usize,
    /// Episodes rolled out with the same parameters before each update.
    pub episodes_per_update: usize,
    pub seed: u64,
    /// Re-validate every visited state.
    pub audit: bool,
    pub schedule: Schedule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 2000,
            steps: None,
            eps_conv: 1e-6,
            patience: 20,
            gamma: 0.99,
            clip: 0.2,
            lr: 3e-4,
            batch: 64,
            update_epochs: 4,
            value_coef: 0.5,
            normalize_advantages: true,
            k_candidates: 32,
            history: 4,
            width: 256,
            episodes_per_update: 1,
            seed: 0,
            audit: false,
            schedule: Schedule::Serial,
        }
    }
}

impl TrainConfig {
    pub fn steps_for(&self, n: usize) -> usize {
        self.steps.unwrap_or(50 * n)
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |what: &str| Err(LearnError::InvalidConfig(what.to_string()));
        if self.episodes == 0 {
            return bad("episodes must be positive");
        }
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return bad("clip must lie in (0, 1)");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return bad("lr must be positive");
        }
        if self.eps_conv < 0.0 {
            return bad("eps_conv must be non-negative");
        }
        if self.batch == 0 || self.update_epochs == 0 || self.k_candidates == 0 || self.width == 0 {
            return bad("batch, update_epochs, k_candidates and width must be positive");
        }
        if self.episodes_per_update == 0 || self.patience == 0 {
            return bad("episodes_per_update and patience must be positive");
        }
        Ok(())
    }
}
