use std::sync::Arc;

use rand::Rng;

use crate::action::Action;
use crate::adversaries::walk::MultiScaleWalk;
use crate::error::{invalid, Result};
use crate::game::LossAdversary;
use crate::seed::{stream_rng, Stream};

/// Clamp to `[lo, hi]`.
pub fn trunc(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}

/// `trunc_[1/2, 1]`.
pub fn trunc_half_one(x: f64) -> f64 {
    trunc(x, 0.5, 1.0)
}

/// The constant `c` in the default gap.
pub const GAP_CONSTANT: f64 = 1.0 / 64.0;
/// Largest admissible gap.
pub const MAX_GAP: f64 = 1.0 / 8.0;

/// Default `(epsilon, sigma)`:
/// `epsilon = min(1/8, c K^{1/3} T^{-1/3} / ln T)` with `c = 1/64`, and
/// `sigma = 1 / (16 sqrt(2) ln T)`.
pub fn default_lb_params(arms: usize, horizon: usize) -> Result<(f64, f64)> {
    if horizon < 3 {
        return Err(invalid("horizon", format!("needs T >= 3, got {horizon}")));
    }
    if arms < 2 {
        return Err(invalid("arms", format!("needs K >= 2, got {arms}")));
    }
    let t = horizon as f64;
    let k = arms as f64;
    let log_t = t.ln();
    let epsilon = (GAP_CONSTANT * k.cbrt() / t.cbrt() / log_t).min(MAX_GAP);
    let sigma = 1.0 / (16.0 * std::f64::consts::SQRT_2 * log_t);
    Ok((epsilon, sigma))
}

/// Oblivious loss `l_t(a) = trunc_[1/2,1](W_t + 3/4 - epsilon * I[Z = a])`.
///
/// `best_arm = None` is the `Z = 0` instance where every arm has the same loss.
#[derive(Debug, Clone)]
pub struct LowerBoundLoss {
    arms: usize,
    best_arm: Option<usize>,
    epsilon: f64,
    walk: Arc<MultiScaleWalk>,
}

impl LowerBoundLoss {
    pub fn new(
        arms: usize,
        best_arm: Option<usize>,
        epsilon: f64,
        walk: Arc<MultiScaleWalk>,
    ) -> Result<Self> {
        if arms < 2 {
            return Err(invalid("arms", "needs K >= 2"));
        }
        if !(epsilon > 0.0 && epsilon <= MAX_GAP) {
            return Err(invalid("epsilon", format!("must lie in (0, 1/8], got {epsilon}")));
        }
        if let Some(z) = best_arm {
            if z >= arms {
                return Err(invalid("best_arm", format!("arm {z} out of range")));
            }
        }
        Ok(Self {
            arms,
            best_arm,
            epsilon,
            walk,
        })
    }

    /// Draws `Z` uniformly over "no best arm" and the `K` arms, and the walk, from
    /// their own streams of `seed`.
    pub fn sample(arms: usize, horizon: usize, epsilon: f64, sigma: f64, seed: u64) -> Result<Self> {
        let draw = stream_rng(seed, Stream::BestArm).random_range(0..=arms);
        let best_arm = draw.checked_sub(1);
        let walk = Arc::new(MultiScaleWalk::sample(sigma, horizon, seed)?);
        Self::new(arms, best_arm, epsilon, walk)
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn best_arm(&self) -> Option<usize> {
        self.best_arm
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn walk(&self) -> &MultiScaleWalk {
        &self.walk
    }

    /// `l'_t(a)`, before truncation.
    pub fn untruncated(&self, t: usize, arm: usize) -> f64 {
        let gap = if self.best_arm == Some(arm) { self.epsilon } else { 0.0 };
        self.walk.value(t) + 0.75 - gap
    }

    pub fn loss_of(&self, t: usize, arm: usize) -> f64 {
        trunc_half_one(self.untruncated(t, arm))
    }

    /// `trunc(W_t + 3/4)`, the loss of every arm other than `Z`.
    pub fn high_loss(&self, t: usize) -> f64 {
        trunc_half_one(self.walk.value(t) + 0.75)
    }

    /// `trunc(W_t + 3/4 - epsilon)`.
    pub fn low_loss(&self, t: usize) -> f64 {
        trunc_half_one(self.walk.value(t) + 0.75 - self.epsilon)
    }
}

impl LossAdversary for LowerBoundLoss {
    fn loss(&self, t: usize, history: &[Action]) -> f64 {
        let arm = history
            .last()
            .and_then(Action::arm)
            .expect("lower-bound loss needs a discrete action");
        self.loss_of(t, arm)
    }
}
