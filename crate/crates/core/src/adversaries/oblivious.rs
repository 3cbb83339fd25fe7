//! Auxiliary loss sequences: oblivious baselines, a bounded-memory example and a
//! convex loss on the ball.

use crate::action::{norm, Action};
use crate::error::{invalid, Result};
use crate::game::LossAdversary;
use crate::seed::{unit_f64, Stream};

/// Every action loses the same constant every round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLoss {
    value: f64,
}

impl ConstantLoss {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(invalid("value", format!("must lie in [0, 1], got {value}")));
        }
        Ok(Self { value })
    }
}

impl LossAdversary for ConstantLoss {
    fn loss(&self, _t: usize, _history: &[Action]) -> f64 {
        self.value
    }
}

/// Oblivious i.i.d. Bernoulli losses: `l_t(a) ~ Bernoulli(means[a])`, drawn
/// counter-based on `(seed, t, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IidBernoulliLoss {
    means: Vec<f64>,
    seed: u64,
}

impl IidBernoulliLoss {
    pub fn new(means: Vec<f64>, seed: u64) -> Result<Self> {
        if means.len() < 2 {
            return Err(invalid("means", "need one mean per arm and at least 2 arms"));
        }
        if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(invalid("means", "each mean must lie in [0, 1]"));
        }
        Ok(Self { means, seed })
    }

    /// Means evenly spread over `[0.3, 0.7]` with arm 0 the best.
    pub fn spread(arms: usize, seed: u64) -> Result<Self> {
        if arms < 2 {
            return Err(invalid("arms", "need at least 2 arms"));
        }
        let means = (0..arms)
            .map(|a| 0.3 + 0.4 * a as f64 / (arms - 1) as f64)
            .collect();
        Self::new(means, seed)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn loss_of(&self, t: usize, arm: usize) -> f64 {
        let counter = (t as u64) * self.means.len() as u64 + arm as u64;
        if unit_f64(self.seed, Stream::IidLoss, counter) < self.means[arm] {
            1.0
        } else {
            0.0
        }
    }
}

impl LossAdversary for IidBernoulliLoss {
    fn loss(&self, t: usize, history: &[Action]) -> f64 {
        let arm = history[t - 1].arm().expect("discrete action expected");
        self.loss_of(t, arm)
    }
}

/// Loses 1 when `a_t` repeats `a_{t-lag}`, 0 otherwise (0 before round `lag + 1`).
/// The loss has `lag`-bounded memory and no smaller bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaggedMatchLoss {
    lag: usize,
}

impl LaggedMatchLoss {
    pub fn new(lag: usize) -> Result<Self> {
        if lag == 0 {
            return Err(invalid("lag", "must be at least 1"));
        }
        Ok(Self { lag })
    }

    pub fn lag(&self) -> usize {
        self.lag
    }
}

impl LossAdversary for LaggedMatchLoss {
    fn loss(&self, t: usize, history: &[Action]) -> f64 {
        if t <= self.lag {
            return 0.0;
        }
        if history[t - 1] == history[t - 1 - self.lag] {
            1.0
        } else {
            0.0
        }
    }
}

/// Convex loss `||x - c||^2 / (r + ||c||)^2` on the ball of radius `r`; values lie
/// in `[0, 1]` for every point of the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBallLoss {
    center: Vec<f64>,
    scale: f64,
}

impl QuadraticBallLoss {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
        let reach = radius + norm(&center);
        Ok(Self {
            center,
            scale: 1.0 / (reach * reach),
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (d2 * self.scale).min(1.0)
    }
}

impl LossAdversary for QuadraticBallLoss {
    fn loss(&self, t: usize, history: &[Action]) -> f64 {
        let x = history[t - 1].point().expect("point action expected");
        self.value(x)
    }
}
