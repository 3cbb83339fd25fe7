//! Oblivious delay adversaries.

use crate::action::Action;
use crate::error::{invalid, Result};
use crate::game::{DelayAdversary, DelayDecision};

/// `d = 1`: the loss is observed in the round it is incurred.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoDelay;

impl DelayAdversary for NoDelay {
    fn span(&self) -> usize {
        1
    }

    fn split(&mut self, _t: usize, _history: &[Action], loss: f64) -> Result<DelayDecision> {
        Ok(DelayDecision {
            components: vec![loss],
            ..Default::default()
        })
    }
}

/// Delays the whole loss by `d - 1` rounds.
#[derive(Debug, Clone, Copy)]
pub struct FullDelay {
    span: usize,
}

impl FullDelay {
    pub fn new(span: usize) -> Result<Self> {
        if span < 1 {
            return Err(invalid("d", "must be at least 1"));
        }
        Ok(Self { span })
    }
}

impl DelayAdversary for FullDelay {
    fn span(&self) -> usize {
        self.span
    }

    fn split(&mut self, _t: usize, _history: &[Action], loss: f64) -> Result<DelayDecision> {
        let mut components = vec![0.0; self.span];
        components[self.span - 1] = loss;
        Ok(DelayDecision {
            components,
            ..Default::default()
        })
    }
}

/// Spreads the loss evenly over the `d` components.
#[derive(Debug, Clone, Copy)]
pub struct UniformSpread {
    span: usize,
}

impl UniformSpread {
    pub fn new(span: usize) -> Result<Self> {
        if span < 1 {
            return Err(invalid("d", "must be at least 1"));
        }
        Ok(Self { span })
    }
}

impl DelayAdversary for UniformSpread {
    fn span(&self) -> usize {
        self.span
    }

    fn split(&mut self, _t: usize, _history: &[Action], loss: f64) -> Result<DelayDecision> {
        let share = loss / self.span as f64;
        let mut components = vec![share; self.span];
        // put the rounding residue on the last component so the sum is exact
        let head: f64 = components[..self.span - 1].iter().sum();
        components[self.span - 1] = (loss - head).max(0.0);
        Ok(DelayDecision {
            components,
            ..Default::default()
        })
    }
}
