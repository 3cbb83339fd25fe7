//! The repeated game between a learner, a loss adversary and a delay adversary.

use serde::{Deserialize, Serialize};

use crate::action::{Action, ActionSpace};
use crate::error::{Error, Result};
use crate::feedback::{FeedbackBuffer, LossSplit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub horizon: usize,
    pub action_space: ActionSpace,
    /// Number of loss components `d`.
    pub delay_span: usize,
    /// Memory bound `m` claimed for the loss sequence.
    pub memory_bound: usize,
    pub master_seed: u64,
}

impl GameConfig {
    pub fn new(
        horizon: usize,
        action_space: ActionSpace,
        delay_span: usize,
        memory_bound: usize,
        master_seed: u64,
    ) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if delay_span < 1 {
            return Err(Error::InvalidConfig("delay span must be at least 1".into()));
        }
        Ok(Self {
            horizon,
            action_space,
            delay_span,
            memory_bound,
            master_seed,
        })
    }
}

/// A learner sees only its own past observations.
pub trait Learner {
    /// Action for round `round` (1-based).
    fn act(&mut self, round: usize) -> Action;
    /// Aggregate observation `l_t^o` delivered at the end of round `round`.
    fn observe(&mut self, round: usize, observed: f64);
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn act(&mut self, round: usize) -> Action {
        (**self).act(round)
    }
    fn observe(&mut self, round: usize, observed: f64) {
        (**self).observe(round, observed)
    }
}

/// A loss sequence `l_t(A_t)`, fixed before the game starts.
///
/// `history` is `A_t = (a_1, ..., a_t)`, so `history.len() == t` and the last
/// entry is the action being evaluated. Implementations must be pure functions of
/// `(t, history)` given their realized randomness; counterfactual replay relies on it.
pub trait LossAdversary: Send + Sync {
    fn loss(&self, t: usize, history: &[Action]) -> f64;
}

impl<L: LossAdversary + ?Sized> LossAdversary for Box<L> {
    fn loss(&self, t: usize, history: &[Action]) -> f64 {
        (**self).loss(t, history)
    }
}

impl<L: LossAdversary + ?Sized> LossAdversary for std::sync::Arc<L> {
    fn loss(&self, t: usize, history: &[Action]) -> f64 {
        (**self).loss(t, history)
    }
}

/// Two-state label of the lower-bound delay construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossState {
    HighLoss,
    LowLoss,
}

/// What a delay adversary returns for one round.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DelayDecision {
    pub components: Vec<f64>,
    pub per_action: Option<Vec<Vec<f64>>>,
    pub diagnostics: RoundDiagnostics,
}

/// Per-round internals of a stateful delay adversary.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RoundDiagnostics {
    pub state: Option<LossState>,
    /// The delayed component carried into this round from the previous one.
    pub carry_in: Option<f64>,
}

/// Splits the realized loss into `span()` components after `a_t` is fixed. May
/// depend on the full action history.
pub trait DelayAdversary {
    fn span(&self) -> usize;
    fn split(&mut self, t: usize, history: &[Action], loss: f64) -> Result<DelayDecision>;
}

impl<D: DelayAdversary + ?Sized> DelayAdversary for Box<D> {
    fn span(&self) -> usize {
        (**self).span()
    }
    fn split(&mut self, t: usize, history: &[Action], loss: f64) -> Result<DelayDecision> {
        (**self).split(t, history, loss)
    }
}

/// Full record of one game. Index `i` holds round `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub actions: Vec<Action>,
    pub true_losses: Vec<f64>,
    pub splits: Vec<LossSplit>,
    pub observed: Vec<f64>,
    pub diagnostics: Vec<RoundDiagnostics>,
}

impl Transcript {
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }

    pub fn realized_total(&self) -> f64 {
        self.true_losses.iter().sum()
    }

    pub fn observed_total(&self) -> f64 {
        self.observed.iter().sum()
    }

    /// Number of rounds `t >= 2` with `a_t != a_{t-1}`.
    pub fn action_switches(&self) -> usize {
        self.actions.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of rounds whose delay-adversary state differs from the previous round.
    /// The state before round 1 is taken to be `HighLoss`.
    pub fn state_switches(&self) -> usize {
        let mut prev = LossState::HighLoss;
        let mut count = 0;
        for d in &self.diagnostics {
            if let Some(s) = d.state {
                if s != prev {
                    count += 1;
                }
                prev = s;
            }
        }
        count
    }

    /// Rounds on which the given arm was played.
    pub fn pulls(&self, arm: usize) -> usize {
        self.actions.iter().filter(|a| a.arm() == Some(arm)).count()
    }
}

/// Plays `config.horizon` rounds. Per round: the learner acts on past observations,
/// the loss adversary evaluates `l_t(A_t)`, the delay adversary splits it, and the
/// aggregate observation is delivered to the learner.
pub fn run_game(
    config: &GameConfig,
    learner: &mut dyn Learner,
    loss_adversary: &dyn LossAdversary,
    delay_adversary: &mut dyn DelayAdversary,
) -> Result<Transcript> {
    if delay_adversary.span() != config.delay_span {
        return Err(Error::InvalidConfig(format!(
            "delay adversary uses {} components but the config says d = {}",
            delay_adversary.span(),
            config.delay_span
        )));
    }
    let horizon = config.horizon;
    let mut actions = Vec::with_capacity(horizon);
    let mut true_losses = Vec::with_capacity(horizon);
    let mut splits = Vec::with_capacity(horizon);
    let mut observed = Vec::with_capacity(horizon);
    let mut diagnostics = Vec::with_capacity(horizon);
    let mut buffer = FeedbackBuffer::new(config.delay_span);

    for t in 1..=horizon {
        let action = learner.act(t);
        if !config.action_space.contains(&action) {
            return Err(Error::ActionOutOfSpace {
                round: t,
                action: action.to_string(),
            });
        }
        actions.push(action);
        let loss = loss_adversary.loss(t, &actions);
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::LossOutOfRange { round: t, loss });
        }
        let decision = delay_adversary.split(t, &actions, loss)?;
        let mut split = LossSplit::new(t, loss, decision.components)?;
        split.per_action = decision.per_action;
        let seen = buffer.deliver(&split)?;
        learner.observe(t, seen);

        true_losses.push(loss);
        splits.push(split);
        observed.push(seen);
        diagnostics.push(decision.diagnostics);
    }

    Ok(Transcript {
        config: config.clone(),
        actions,
        true_losses,
        splits,
        observed,
        diagnostics,
    })
}
