//! Two-armed construction under which every learner observes `0, 1, 0, 1, ...`
//! while its pseudo regret grows linearly.
//!
//! Odd rounds: arm `Z` loses 0, the other arm loses 1, and the whole loss is
//! delayed to the next round. Even rounds: both arms lose 1 if `a_{t-1} = Z`,
//! both lose 0 otherwise, and nothing is delayed. The loss sequence has
//! 1-bounded memory.

use rand::Rng;

use crate::action::Action;
use crate::error::{invalid, Error, Result};
use crate::game::{DelayAdversary, DelayDecision, LossAdversary};
use crate::seed::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theorem1Loss {
    best_arm: usize,
}

impl Theorem1Loss {
    pub fn new(best_arm: usize) -> Result<Self> {
        if best_arm > 1 {
            return Err(invalid("best_arm", "the construction has two arms"));
        }
        Ok(Self { best_arm })
    }

    /// `Z` uniform over the two arms.
    pub fn sample(seed: u64) -> Self {
        Self {
            best_arm: stream_rng(seed, Stream::BestArm).random_range(0..2),
        }
    }

    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    /// Loss of `arm` at round `t`; `prev_action` is `a_{t-1}` and is only read on
    /// even rounds.
    pub fn loss_of(&self, t: usize, prev_action: Option<usize>, arm: usize) -> f64 {
        if t % 2 == 1 {
            if arm == self.best_arm {
                0.0
            } else {
                1.0
            }
        } else {
            let prev = prev_action.expect("even rounds have a previous action");
            if prev == self.best_arm {
                1.0
            } else {
                0.0
            }
        }
    }
}

impl LossAdversary for Theorem1Loss {
    fn loss(&self, t: usize, history: &[Action]) -> f64 {
        let arm = |a: &Action| a.arm().expect("two-armed construction needs discrete actions");
        let current = arm(&history[t - 1]);
        let prev = (t >= 2).then(|| arm(&history[t - 2]));
        self.loss_of(t, prev, current)
    }
}

/// `(l^(0), l^(1))`: odd rounds delay everything by one round, even rounds nothing.
pub fn thm1_split(t: usize, loss: f64) -> [f64; 2] {
    if t % 2 == 1 {
        [0.0, loss]
    } else {
        [loss, 0.0]
    }
}

/// Delay adversary applying [`thm1_split`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ParityDelay;

impl DelayAdversary for ParityDelay {
    fn span(&self) -> usize {
        2
    }

    fn split(&mut self, t: usize, _history: &[Action], loss: f64) -> Result<DelayDecision> {
        if !loss.is_finite() {
            return Err(Error::InvalidSplit {
                round: t,
                reason: "loss is not finite".into(),
            });
        }
        Ok(DelayDecision {
            components: thm1_split(t, loss).to_vec(),
            ..Default::default()
        })
    }
}
