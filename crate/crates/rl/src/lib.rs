//! Constrained PPO on the hasard environments: a factorized-categorical MLP
//! actor with reward and cost critics, trained by PPO, PPOCost, PPOLag or
//! PPOPID. Gradients are written by hand and checked against finite
//! differences in [`gradcheck`].

pub mod checkpoint;
pub mod control;
pub mod eval;
pub mod gae;
pub mod gradcheck;
pub mod loss;
pub mod net;
pub mod norm;
pub mod optim;
pub mod policy;
pub mod real;
pub mod train;

pub use control::{lagrange_update, pid_update, shape_cost_reward, LagrangeState, PidState};
pub use eval::{evaluate, evaluate_policy, Actor, EvalSummary, PolicyActor};
pub use gae::compute_gae;
pub use gradcheck::gradient_check;
pub use loss::{ppo_loss, LossBatch, LossConfig, LossStats};
pub use policy::Policy;
pub use train::{train, EpisodeTotals, LogRow, Method, TrainConfig, TrainLog, TrainState, Trainer, LOG_HEADER};

use hasard_core::env::EnvError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite loss or gradient at update {update}: {detail}")]
    NonFinite { update: u64, detail: String },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
