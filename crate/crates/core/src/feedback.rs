//! Loss splits and the anonymous aggregation of delayed components.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for split validity and rounding clamps.
pub const SPLIT_TOLERANCE: f64 = 1e-12;

/// The `d` components `l_t^(0..d-1)(A_t)` of one round's true loss.
///
/// Component `s` surfaces in the observation `s` rounds later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSplit {
    pub round: usize,
    pub loss: f64,
    pub components: Vec<f64>,
    /// Optional full split for every action (rows indexed by arm), for diagnostics.
    pub per_action: Option<Vec<Vec<f64>>>,
}

/// Clamps rounding noise in `[-tol, 0)` to zero, errors on anything more negative
/// or above `upper + tol`.
pub(crate) fn clamp_component(value: f64, upper: f64) -> std::result::Result<f64, String> {
    if !value.is_finite() {
        return Err(format!("component {value} is not finite"));
    }
    if value < -SPLIT_TOLERANCE {
        return Err(format!("component {value} is negative"));
    }
    if value > upper + SPLIT_TOLERANCE {
        return Err(format!("component {value} exceeds the loss {upper}"));
    }
    Ok(value.max(0.0))
}

impl LossSplit {
    /// Validated split: each component in `[0, loss]` and the sum equal to `loss`
    /// within [`SPLIT_TOLERANCE`].
    pub fn new(round: usize, loss: f64, components: Vec<f64>) -> Result<Self> {
        let bad = |reason: String| Error::InvalidSplit { round, reason };
        if components.is_empty() {
            return Err(bad("no components".into()));
        }
        let components = components
            .into_iter()
            .map(|c| clamp_component(c, loss))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(bad)?;
        let sum: f64 = components.iter().sum();
        if (sum - loss).abs() > SPLIT_TOLERANCE {
            return Err(bad(format!("components sum to {sum}, loss is {loss}")));
        }
        Ok(Self {
            round,
            loss,
            components,
            per_action: None,
        })
    }

    pub fn with_per_action(mut self, per_action: Vec<Vec<f64>>) -> Self {
        self.per_action = Some(per_action);
        self
    }

    pub fn span(&self) -> usize {
        self.components.len()
    }
}

/// Holds the splits of the previous `d - 1` rounds, most recent first.
#[derive(Debug, Clone)]
pub struct FeedbackBuffer {
    span: usize,
    pending: VecDeque<Vec<f64>>,
    next_round: usize,
}

impl FeedbackBuffer {
    pub fn new(span: usize) -> Self {
        Self {
            span: span.max(1),
            pending: VecDeque::with_capacity(span.saturating_sub(1)),
            next_round: 1,
        }
    }

    pub fn span(&self) -> usize {
        self.span
    }

    /// Number of buffered past splits; never exceeds `d - 1`.
    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Mass that surfaces `offset` rounds after the most recently pushed round.
    pub fn due_in(&self, offset: usize) -> f64 {
        if offset == 0 {
            return 0.0;
        }
        // the split pushed k rounds ago (k = 1 is the most recent) contributes its
        // component k + offset - 1
        self.pending
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.get(i + offset))
            .sum()
    }

    /// `l_t^o = sum_s l_{t-s}^(s)`, with `current` the split of round `t`.
    /// Rounds before the first contribute nothing.
    pub fn observe_aggregate(&self, current: &LossSplit) -> f64 {
        let delayed: f64 = self
            .pending
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.get(i + 1))
            .sum();
        current.components[0] + delayed
    }

    /// Schedules component `s` of `split` to surface at round `split.round + s`.
    pub fn push_split(&mut self, split: &LossSplit) -> Result<()> {
        if split.round != self.next_round {
            return Err(Error::OutOfOrderSplit {
                expected: self.next_round,
                got: split.round,
            });
        }
        if split.span() != self.span {
            return Err(Error::InvalidSplit {
                round: split.round,
                reason: format!("expected {} components, got {}", self.span, split.span()),
            });
        }
        let sum: f64 = split.components.iter().sum();
        if (sum - split.loss).abs() > SPLIT_TOLERANCE
            || split.components.iter().any(|&c| !(0.0..=split.loss + SPLIT_TOLERANCE).contains(&c))
        {
            return Err(Error::InvalidSplit {
                round: split.round,
                reason: "components do not form a valid split of the loss".into(),
            });
        }
        if self.span > 1 {
            self.pending.push_front(split.components.clone());
            self.pending.truncate(self.span - 1);
        }
        self.next_round += 1;
        Ok(())
    }

    /// Observation for `current`, then schedules its delayed components.
    pub fn deliver(&mut self, current: &LossSplit) -> Result<f64> {
        let observed = self.observe_aggregate(current);
        self.push_split(current)?;
        Ok(observed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(round: usize, c: &[f64]) -> LossSplit {
        LossSplit::new(round, c.iter().sum(), c.to_vec()).unwrap()
    }

    #[test]
    fn delayed_component_is_pending_for_next_round() {
        let mut buf = FeedbackBuffer::new(2);
        let first = split(1, &[0.2, 0.3]);
        assert_eq!(buf.deliver(&first).unwrap(), 0.2);
        assert_eq!(buf.due_in(1), 0.3);
        assert_eq!(buf.len(), 1);
        let second = split(2, &[0.4, 0.1]);
        assert!((buf.deliver(&second).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn no_delay_keeps_nothing_pending() {
        let mut buf = FeedbackBuffer::new(1);
        assert_eq!(buf.deliver(&split(1, &[0.7])).unwrap(), 0.7);
        assert!(buf.is_empty());
        assert_eq!(buf.due_in(1), 0.0);
    }

    #[test]
    fn pure_delay_surfaces_two_rounds_later() {
        let mut buf = FeedbackBuffer::new(3);
        assert_eq!(buf.deliver(&split(1, &[0.0, 0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(buf.due_in(2), 1.0);
        assert_eq!(buf.deliver(&split(2, &[0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(buf.deliver(&split(3, &[0.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(buf.deliver(&split(4, &[0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(buf.len(), 2);
    }

    #[test]
    fn zero_splits_observe_zero() {
        let mut buf = FeedbackBuffer::new(4);
        for t in 1..=10 {
            assert_eq!(buf.deliver(&split(t, &[0.0; 4])).unwrap(), 0.0);
        }
    }

    #[test]
    fn observation_can_exceed_one() {
        let mut buf = FeedbackBuffer::new(2);
        buf.deliver(&split(1, &[0.0, 1.0])).unwrap();
        assert_eq!(buf.deliver(&split(2, &[1.0, 0.0])).unwrap(), 2.0);
    }

    #[test]
    fn invalid_splits_are_rejected() {
        assert!(LossSplit::new(1, 0.5, vec![0.3, 0.3]).is_err());
        assert!(LossSplit::new(1, 0.5, vec![0.6, -0.1]).is_err());
        assert!(LossSplit::new(1, 0.5, vec![]).is_err());
        // rounding noise is absorbed
        let s = LossSplit::new(1, 0.5, vec![0.5 + 1e-13, -1e-13]).unwrap();
        assert_eq!(s.components[1], 0.0);
    }

    #[test]
    fn pushes_must_be_consecutive_and_match_span() {
        let mut buf = FeedbackBuffer::new(2);
        assert!(matches!(
            buf.push_split(&split(2, &[0.1, 0.1])),
            Err(Error::OutOfOrderSplit { expected: 1, got: 2 })
        ));
        assert!(buf.push_split(&split(1, &[0.1, 0.1, 0.1])).is_err());
        buf.push_split(&split(1, &[0.1, 0.1])).unwrap();
        let mut forged = split(2, &[0.1, 0.1]);
        forged.loss = 0.5;
        assert!(buf.push_split(&forged).is_err());
    }
}
