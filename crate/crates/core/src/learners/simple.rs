//! Baseline and test learners.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use crate::action::{Action, ActionSpace};
use crate::game::Learner;
use crate::seed::{stream_rng, Stream};

/// Plays an independent uniform action every round.
#[derive(Debug, Clone)]
pub struct UniformRandom {
    space: ActionSpace,
    rng: ChaCha8Rng,
}

impl UniformRandom {
    pub fn new(space: ActionSpace, seed: u64) -> Self {
        Self {
            space,
            rng: stream_rng(seed, Stream::Learner),
        }
    }
}

impl Learner for UniformRandom {
    fn act(&mut self, _round: usize) -> Action {
        self.space.sample(&mut self.rng)
    }

    fn observe(&mut self, _round: usize, _observed: f64) {}
}

#[derive(Debug, Clone)]
pub struct FixedAction(pub Action);

impl Learner for FixedAction {
    fn act(&mut self, _round: usize) -> Action {
        self.0.clone()
    }

    fn observe(&mut self, _round: usize, _observed: f64) {}
}

/// Replays a fixed action list (cycling if it is shorter than the horizon) and
/// records every call.
#[derive(Debug, Clone, Default)]
pub struct ScriptedLearner {
    script: Vec<Action>,
    /// `(round, true)` for `act`, `(round, false)` for `observe`, in call order.
    pub calls: Vec<(usize, bool)>,
    pub observations: Vec<f64>,
}

impl ScriptedLearner {
    pub fn new(script: Vec<Action>) -> Self {
        assert!(!script.is_empty(), "script must not be empty");
        Self {
            script,
            ..Default::default()
        }
    }

    pub fn arms(arms: &[usize]) -> Self {
        Self::new(arms.iter().map(|&a| Action::Arm(a)).collect())
    }
}

impl Learner for ScriptedLearner {
    fn act(&mut self, round: usize) -> Action {
        self.calls.push((round, true));
        self.script[(round - 1) % self.script.len()].clone()
    }

    fn observe(&mut self, round: usize, observed: f64) {
        self.calls.push((round, false));
        self.observations.push(observed);
    }
}

/// Deterministic learner given by a table from the observation history
/// `(l_1^o, ..., l_{t-1}^o)` to an arm. Histories missing from the table play
/// `default`.
#[derive(Debug, Clone)]
pub struct LookupTableLearner {
    table: HashMap<Vec<u64>, usize>,
    default: usize,
    history: Vec<u64>,
}

impl LookupTableLearner {
    pub fn new(default: usize) -> Self {
        Self {
            table: HashMap::new(),
            default,
            history: Vec::new(),
        }
    }

    /// Key for an observation history; values compare by their bit pattern.
    pub fn key(observations: &[f64]) -> Vec<u64> {
        observations.iter().map(|o| o.to_bits()).collect()
    }

    pub fn insert(&mut self, observations: &[f64], arm: usize) {
        self.table.insert(Self::key(observations), arm);
    }

    pub fn history(&self) -> Vec<f64> {
        self.history.iter().map(|&b| f64::from_bits(b)).collect()
    }
}

impl Learner for LookupTableLearner {
    fn act(&mut self, _round: usize) -> Action {
        Action::Arm(*self.table.get(&self.history).unwrap_or(&self.default))
    }

    fn observe(&mut self, _round: usize, observed: f64) {
        self.history.push(observed.to_bits());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_table_follows_history() {
        let mut l = LookupTableLearner::new(0);
        l.insert(&[], 1);
        l.insert(&[0.5], 0);
        l.insert(&[0.5, 1.0], 1);
        assert_eq!(l.act(1), Action::Arm(1));
        l.observe(1, 0.5);
        assert_eq!(l.act(2), Action::Arm(0));
        l.observe(2, 0.25);
        assert_eq!(l.act(3), Action::Arm(0));
        assert_eq!(l.history(), vec![0.5, 0.25]);
    }

    #[test]
    fn uniform_stays_in_space() {
        let space = ActionSpace::discrete(3).unwrap();
        let mut l = UniformRandom::new(space.clone(), 4);
        let mut seen = [false; 3];
        for t in 1..=200 {
            let a = l.act(t);
            assert!(space.contains(&a));
            seen[a.arm().unwrap()] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn script_cycles() {
        let mut l = ScriptedLearner::arms(&[1, 0]);
        assert_eq!(l.act(1), Action::Arm(1));
        assert_eq!(l.act(2), Action::Arm(0));
        assert_eq!(l.act(3), Action::Arm(1));
    }
}
