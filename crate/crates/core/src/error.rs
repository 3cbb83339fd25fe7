use thiserror::Error;

/// Errors raised by the game engine, adversaries, learners and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("round {round}: action {action} is outside the action space")]
    ActionOutOfSpace { round: usize, action: String },

    #[error("round {round}: loss {loss} is outside [0, 1]")]
    LossOutOfRange { round: usize, loss: f64 },

    #[error("round {round}: invalid loss split: {reason}")]
    InvalidSplit { round: usize, reason: String },

    #[error("round {round}: delay construction broke its invariant: {reason}")]
    Construction { round: usize, reason: String },

    #[error("feedback buffer expected round {expected}, got {got}")]
    OutOfOrderSplit { expected: usize, got: usize },

    #[error("replay diverged at round {round}: recorded {recorded}, replayed {replayed}")]
    NonDeterministicReplay {
        round: usize,
        recorded: f64,
        replayed: f64,
    },

    #[error("learner feedback {value} is outside [0, 1]")]
    FeedbackOutOfRange { value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
