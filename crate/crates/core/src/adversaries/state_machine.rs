//! Two-state delay adversary that makes each round's observation independent of
//! the arm just played.
//!
//! In round `t` the machine first updates its state from the carried component
//! `c = l_{t-1}^(1)(a_{t-1})`:
//!
//! * `HighLoss` and `c < epsilon` switches to `LowLoss`;
//! * `LowLoss` and `c > 1/4 - epsilon` switches to `HighLoss`;
//! * otherwise the state is kept (boundary equality keeps it).
//!
//! It then splits every arm's loss as
//! `l^(0)(a) = trunc(W_t + 3/4 - epsilon * I[LowLoss]) - c` and
//! `l^(1)(a) = l_t(a) - l^(0)(a)`, so the observation
//! `l^(0)(a_t) + c` equals `trunc(W_t + 3/4 - epsilon * I[LowLoss])` whatever
//! `a_t` is. The new carry is `l^(1)(a_t)`.
//!
//! With no best arm every arm has the high loss, so the machine never leaves
//! `HighLoss` and never delays anything.

use crate::action::Action;
use crate::adversaries::lower_bound::{LowerBoundLoss, MAX_GAP};
use crate::error::{invalid, Error, Result};
use crate::feedback::{clamp_component, SPLIT_TOLERANCE};
use crate::game::{DelayAdversary, DelayDecision, LossState, RoundDiagnostics};

/// Largest carried component the construction ever produces.
pub const CARRY_CEILING: f64 = 0.25;

/// Ceiling `8 epsilon T_i / (1 - 8 epsilon)` on state switches when `Z = i`.
pub fn switch_bound(epsilon: f64, best_arm_pulls: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < MAX_GAP) {
        return Err(invalid("epsilon", format!("must lie in (0, 1/8), got {epsilon}")));
    }
    Ok(8.0 * epsilon * best_arm_pulls as f64 / (1.0 - 8.0 * epsilon))
}

/// One round of the machine.
#[derive(Debug, Clone, PartialEq)]
pub struct DsmStep {
    pub state: LossState,
    pub carry_in: f64,
    /// `[l^(0)(a), l^(1)(a)]` for every arm.
    pub per_arm: Vec<[f64; 2]>,
    /// The value every arm would observe this round.
    pub observed: f64,
    pub carry_out: f64,
}

#[derive(Debug, Clone)]
pub struct DelayStateMachine {
    loss: LowerBoundLoss,
    state: LossState,
    carry: f64,
    switches: usize,
}

impl DelayStateMachine {
    pub fn new(loss: LowerBoundLoss) -> Self {
        Self {
            loss,
            state: LossState::HighLoss,
            carry: 0.0,
            switches: 0,
        }
    }

    pub fn state(&self) -> LossState {
        self.state
    }

    pub fn carry(&self) -> f64 {
        self.carry
    }

    /// State transitions performed so far.
    pub fn switches(&self) -> usize {
        self.switches
    }

    pub fn loss(&self) -> &LowerBoundLoss {
        &self.loss
    }

    fn next_state(&self) -> LossState {
        let eps = self.loss.epsilon();
        if self.loss.best_arm().is_none() {
            return LossState::HighLoss;
        }
        match self.state {
            LossState::HighLoss if self.carry < eps => LossState::LowLoss,
            LossState::LowLoss if self.carry > CARRY_CEILING - eps => LossState::HighLoss,
            s => s,
        }
    }

    /// Transition, split every arm, and carry the chosen arm's delayed part forward.
    pub fn step(&mut self, t: usize, chosen_arm: usize) -> Result<DsmStep> {
        let broken = |reason: String| Error::Construction { round: t, reason };
        if chosen_arm >= self.loss.arms() {
            return Err(broken(format!("arm {chosen_arm} out of range")));
        }
        let state = self.next_state();
        if state != self.state {
            self.switches += 1;
        }
        self.state = state;
        let carry_in = self.carry;
        let target = match state {
            LossState::HighLoss => self.loss.high_loss(t),
            LossState::LowLoss => self.loss.low_loss(t),
        };

        let mut per_arm = Vec::with_capacity(self.loss.arms());
        for arm in 0..self.loss.arms() {
            let total = self.loss.loss_of(t, arm);
            let immediate = target - carry_in;
            let delayed = total - immediate;
            let immediate = clamp_component(immediate, total)
                .map_err(|e| broken(format!("arm {arm}, immediate part: {e}")))?;
            let delayed = clamp_component(delayed, total)
                .map_err(|e| broken(format!("arm {arm}, delayed part: {e}")))?;
            if delayed > CARRY_CEILING + SPLIT_TOLERANCE {
                return Err(broken(format!(
                    "arm {arm} would carry {delayed}, above {CARRY_CEILING}"
                )));
            }
            per_arm.push([immediate, delayed]);
        }
        let carry_out = per_arm[chosen_arm][1];
        self.carry = carry_out;
        Ok(DsmStep {
            state,
            carry_in,
            per_arm,
            observed: target,
            carry_out,
        })
    }
}

impl DelayAdversary for DelayStateMachine {
    fn span(&self) -> usize {
        2
    }

    fn split(&mut self, t: usize, history: &[Action], loss: f64) -> Result<DelayDecision> {
        let arm = history.last().and_then(Action::arm).ok_or_else(|| Error::Construction {
            round: t,
            reason: "state machine needs a discrete action".into(),
        })?;
        let expected = self.loss.loss_of(t, arm);
        if expected.to_bits() != loss.to_bits() {
            return Err(Error::Construction {
                round: t,
                reason: format!("loss {loss} does not match the construction's {expected}"),
            });
        }
        let step = self.step(t, arm)?;
        let chosen = step.per_arm[arm];
        Ok(DelayDecision {
            components: chosen.to_vec(),
            per_action: Some(step.per_arm.iter().map(|c| c.to_vec()).collect()),
            diagnostics: RoundDiagnostics {
                state: Some(step.state),
                carry_in: Some(step.carry_in),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::adversaries::walk::MultiScaleWalk;

    fn flat_machine(best: Option<usize>, eps: f64, horizon: usize) -> DelayStateMachine {
        let walk = Arc::new(MultiScaleWalk::from_increments(&vec![0.0; horizon]));
        DelayStateMachine::new(LowerBoundLoss::new(2, best, eps, walk).unwrap())
    }

    #[test]
    fn first_round_switches_to_low_loss() {
        let mut dsm = flat_machine(Some(0), 0.1, 4);
        let step = dsm.step(1, 1).unwrap();
        assert_eq!(step.state, LossState::LowLoss);
        assert!((step.per_arm[0][0] - 0.65).abs() < 1e-15);
        assert!((step.per_arm[1][0] - 0.65).abs() < 1e-15);
        assert_eq!(step.per_arm[0][1], 0.0);
        assert!((step.per_arm[1][1] - 0.1).abs() < 1e-15);
        assert!((step.carry_out - 0.1).abs() < 1e-15);
        assert_eq!(dsm.switches(), 1);
    }

    #[test]
    fn large_carry_switches_back_to_high_loss() {
        let mut dsm = flat_machine(Some(0), 0.1, 4);
        dsm.state = LossState::LowLoss;
        dsm.carry = 0.2;
        let step = dsm.step(1, 1).unwrap();
        assert_eq!(step.state, LossState::HighLoss);
        assert!((step.per_arm[1][1] - 0.2).abs() < 1e-15);
        // best arm gives back up to epsilon
        assert!((step.per_arm[0][1] - 0.1).abs() < 1e-12);
        assert_eq!(step.observed, 0.75);
    }

    #[test]
    fn boundaries_keep_the_state() {
        let mut dsm = flat_machine(Some(0), 0.125, 4);
        dsm.state = LossState::LowLoss;
        dsm.carry = 0.125; // exactly 1/4 - epsilon
        assert_eq!(dsm.step(1, 0).unwrap().state, LossState::LowLoss);
        let mut dsm = flat_machine(Some(0), 0.0625, 4);
        dsm.carry = 0.0625; // exactly epsilon
        assert_eq!(dsm.step(1, 0).unwrap().state, LossState::HighLoss);
    }

    #[test]
    fn no_best_arm_never_delays() {
        let walk = Arc::new(MultiScaleWalk::sample(0.05, 200, 3).unwrap());
        let mut dsm = DelayStateMachine::new(LowerBoundLoss::new(2, None, 0.1, walk).unwrap());
        for t in 1..=200 {
            let step = dsm.step(t, t % 2).unwrap();
            assert_eq!(step.state, LossState::HighLoss);
            assert_eq!(step.carry_out, 0.0);
            assert!(step.per_arm.iter().all(|c| c[1] == 0.0));
        }
        assert_eq!(dsm.switches(), 0);
    }

    #[test]
    fn split_rejects_foreign_losses() {
        let mut dsm = flat_machine(Some(0), 0.1, 4);
        let history = [Action::Arm(0)];
        assert!(dsm.split(1, &history, 0.7).is_err());
        let decision = dsm.split(1, &history, dsm.loss().loss_of(1, 0)).unwrap();
        assert_eq!(decision.components.len(), 2);
        assert_eq!(decision.diagnostics.state, Some(LossState::LowLoss));
    }

    #[test]
    fn switch_bound_formula() {
        assert_eq!(switch_bound(0.05, 0).unwrap(), 0.0);
        assert!((switch_bound(1.0 / 16.0, 100).unwrap() - 100.0).abs() < 1e-12);
        assert!(switch_bound(0.125, 10).is_err());
        assert!(switch_bound(0.0, 10).is_err());
    }
}
