//! Adversarial bandits with composite anonymous delayed feedback.
//!
//! The game engine ([`game::run_game`]) plays a [`game::Learner`] against a loss
//! adversary and a delay adversary. The learner sees only the per-round aggregate
//! of delayed loss components. [`regret`] replays counterfactual action sequences
//! through the loss adversary to compute policy and pseudo regret exactly.

pub mod action;
pub mod adversaries;
pub mod analysis;
pub mod error;
pub mod feedback;
pub mod game;
pub mod learners;
pub mod regret;
pub mod seed;

pub use action::{Action, ActionSpace};
pub use error::{Error, Result};
pub use feedback::{FeedbackBuffer, LossSplit};
pub use game::{
    run_game, DelayAdversary, DelayDecision, GameConfig, Learner, LossAdversary, LossState, RoundDiagnostics,
    Transcript,
};
pub use regret::{check_bounded_memory, policy_regret, pseudo_regret, MemoryProbe, RegretReport};
