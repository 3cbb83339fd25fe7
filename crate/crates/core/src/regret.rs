//! Exact regret accounting by counterfactual replay, and the bounded-memory probe.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::action::{Action, ActionSpace};
use crate::error::{Error, Result};
use crate::game::{LossAdversary, Transcript};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub realized_total: f64,
    /// `sum_t l_t(y, ..., y)` for each comparator `y`, in comparator order.
    pub comparator_totals: Vec<(Action, f64)>,
    pub policy_regret: f64,
    pub pseudo_regret: f64,
}

impl RegretReport {
    /// Comparator with the smallest constant-sequence total (lowest index on ties).
    pub fn best_comparator(&self) -> Option<&Action> {
        argmin(self.comparator_totals.iter().map(|(_, v)| *v)).map(|i| &self.comparator_totals[i].0)
    }
}

fn argmin(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Replays the realized actions and checks they reproduce the recorded losses
/// bit-for-bit. Returns the realized total.
fn replay_realized(transcript: &Transcript, loss: &dyn LossAdversary) -> Result<f64> {
    let mut total = 0.0;
    for t in 1..=transcript.horizon() {
        let replayed = loss.loss(t, &transcript.actions[..t]);
        let recorded = transcript.true_losses[t - 1];
        if replayed.to_bits() != recorded.to_bits() {
            return Err(Error::NonDeterministicReplay {
                round: t,
                recorded,
                replayed,
            });
        }
        total += replayed;
    }
    Ok(total)
}

/// `sum_t l_t(y^t)` for the constant history `y^t`.
pub fn constant_sequence_total(loss: &dyn LossAdversary, comparator: &Action, horizon: usize) -> f64 {
    let history = vec![comparator.clone(); horizon];
    (1..=horizon).map(|t| loss.loss(t, &history[..t])).sum()
}

/// Policy regret against constant action sequences, plus the pseudo regret of
/// the same run.
pub fn policy_regret(
    transcript: &Transcript,
    loss: &dyn LossAdversary,
    comparators: &[Action],
) -> Result<RegretReport> {
    if comparators.is_empty() {
        return Err(Error::InvalidConfig("no comparators supplied".into()));
    }
    let realized_total = replay_realized(transcript, loss)?;
    let horizon = transcript.horizon();
    let comparator_totals: Vec<(Action, f64)> = comparators
        .iter()
        .map(|y| (y.clone(), constant_sequence_total(loss, y, horizon)))
        .collect();
    let best = comparator_totals
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let pseudo_regret = pseudo_regret(transcript, loss, comparators)?;
    Ok(RegretReport {
        realized_total,
        comparator_totals,
        policy_regret: realized_total - best,
        pseudo_regret,
    })
}

/// External pseudo regret: `sum_t l_t(A_t) - min_y sum_t l_t(A_{t-1}, y)`.
pub fn pseudo_regret(
    transcript: &Transcript,
    loss: &dyn LossAdversary,
    comparators: &[Action],
) -> Result<f64> {
    if comparators.is_empty() {
        return Err(Error::InvalidConfig("no comparators supplied".into()));
    }
    let realized_total = replay_realized(transcript, loss)?;
    let mut scratch = transcript.actions.clone();
    let mut totals = vec![0.0; comparators.len()];
    for t in 1..=transcript.horizon() {
        let realized = std::mem::replace(&mut scratch[t - 1], comparators[0].clone());
        for (total, y) in totals.iter_mut().zip(comparators) {
            scratch[t - 1].clone_from(y);
            *total += loss.loss(t, &scratch[..t]);
        }
        scratch[t - 1] = realized;
    }
    let best = argmin(totals.iter().copied()).map(|i| totals[i]).unwrap_or(0.0);
    Ok(realized_total - best)
}

/// Outcome of [`check_bounded_memory`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MemoryProbe {
    Pass { trials: usize },
    /// Two histories agreeing on their last `m + 1` actions with different losses.
    Fail {
        round: usize,
        history: Vec<Action>,
        perturbed: Vec<Action>,
        loss: f64,
        perturbed_loss: f64,
    },
}

impl MemoryProbe {
    pub fn passed(&self) -> bool {
        matches!(self, MemoryProbe::Pass { .. })
    }
}

fn different_action<R: Rng + ?Sized>(space: &ActionSpace, current: &Action, rng: &mut R) -> Action {
    match (space, current) {
        (ActionSpace::Discrete { arms }, Action::Arm(a)) => {
            Action::Arm((a + rng.random_range(1..*arms)) % arms)
        }
        _ => loop {
            let candidate = space.sample(rng);
            if &candidate != current {
                return candidate;
            }
        },
    }
}

/// Randomized probe of `m`-bounded memory: samples histories, changes every action
/// strictly older than the last `m + 1`, and checks that `l_t` is unchanged.
pub fn check_bounded_memory<R: Rng + ?Sized>(
    loss: &dyn LossAdversary,
    space: &ActionSpace,
    horizon: usize,
    memory: usize,
    trials: usize,
    rng: &mut R,
) -> MemoryProbe {
    let trials = trials.max(1);
    // rounds t <= m + 1 have no action old enough to perturb
    if horizon <= memory + 1 {
        return MemoryProbe::Pass { trials };
    }
    for _ in 0..trials {
        let t = rng.random_range(memory + 2..=horizon);
        let history: Vec<Action> = (0..t).map(|_| space.sample(rng)).collect();
        let mut perturbed = history.clone();
        // a_1 .. a_{t-m-1} are the entries outside the memory window
        for slot in perturbed.iter_mut().take(t - memory - 1) {
            *slot = different_action(space, slot, rng);
        }
        let original = loss.loss(t, &history);
        let changed = loss.loss(t, &perturbed);
        if original.to_bits() != changed.to_bits() {
            return MemoryProbe::Fail {
                round: t,
                history,
                perturbed,
                loss: original,
                perturbed_loss: changed,
            };
        }
    }
    MemoryProbe::Pass { trials }
}
