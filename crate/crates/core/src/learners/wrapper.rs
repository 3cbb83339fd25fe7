//! Mini-batch wrapper: plays one inner action for `tau` consecutive rounds and
//! feeds the inner learner the clipped batch average of the observations.

use crate::action::Action;
use crate::game::Learner;

/// `ceil`, tolerant of values that are integers up to floating-point noise.
fn ceil_tolerant(x: f64) -> usize {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// `max(ceil((T/K)^{1/3}), d + 1, m + 1, 1)`. Pass `delay_guess = 0` when `d` is
/// unknown.
pub fn choose_tau(horizon: usize, arms: usize, delay_guess: usize, memory: usize) -> usize {
    let base = ceil_tolerant((horizon as f64 / arms.max(1) as f64).cbrt());
    base.max(delay_guess + 1).max(memory + 1).max(1)
}

/// Batch size for the convex variant: `max(ceil(K^{-19/3} T^{1/3}), d + 1, m + 1, 1)`
/// where `K` is the dimension.
pub fn choose_tau_bco(horizon: usize, dimension: usize, delay_guess: usize, memory: usize) -> usize {
    let k = dimension.max(1) as f64;
    let base = ceil_tolerant(k.powf(-19.0 / 3.0) * (horizon as f64).cbrt());
    base.max(delay_guess + 1).max(memory + 1).max(1)
}

/// Number of full batches `floor(T / tau)`, at least 1.
pub fn inner_rounds(horizon: usize, tau: usize) -> usize {
    (horizon / tau.max(1)).max(1)
}

#[derive(Debug, Clone)]
pub struct MiniBatch<L> {
    inner: L,
    tau: usize,
    horizon: usize,
    fallback: Action,
    batch: usize,
    current: Option<Action>,
    into_batch: usize,
    accumulated: f64,
    leftover: bool,
    fed: Vec<f64>,
}

impl<L: Learner> MiniBatch<L> {
    /// `fallback` is played in the leftover rounds when no batch has been played.
    pub fn new(inner: L, tau: usize, horizon: usize, fallback: Action) -> Self {
        Self {
            inner,
            tau: tau.max(1),
            horizon,
            fallback,
            batch: 0,
            current: None,
            into_batch: 0,
            accumulated: 0.0,
            leftover: false,
            fed: Vec::new(),
        }
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Batches started so far; equals the number of inner queries.
    pub fn batches(&self) -> usize {
        self.batch
    }

    /// Every value fed to the inner learner, in batch order.
    pub fn feedback_log(&self) -> &[f64] {
        &self.fed
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    pub fn into_inner(self) -> L {
        self.inner
    }
}

impl<L: Learner> Learner for MiniBatch<L> {
    fn act(&mut self, round: usize) -> Action {
        if self.into_batch == 0 {
            let remaining = self.horizon.saturating_sub(round - 1);
            if remaining >= self.tau {
                self.batch += 1;
                self.leftover = false;
                self.current = Some(self.inner.act(self.batch));
            } else {
                // fewer than tau rounds left: keep the last batch action
                self.leftover = true;
                if self.current.is_none() {
                    self.current = Some(self.fallback.clone());
                }
            }
        }
        self.current.clone().expect("set above")
    }

    fn observe(&mut self, _round: usize, observed: f64) {
        if self.leftover {
            return;
        }
        self.accumulated += observed;
        self.into_batch += 1;
        if self.into_batch == self.tau {
            let average = self.accumulated / self.tau as f64;
            let fed = average.min(1.0);
            debug_assert!(fed >= 0.0);
            self.inner.observe(self.batch, fed);
            self.fed.push(fed);
            self.accumulated = 0.0;
            self.into_batch = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Inner learner returning a scripted arm sequence and recording feedback.
    #[derive(Default)]
    struct Script {
        arms: Vec<usize>,
        queries: Vec<usize>,
        feedback: Vec<(usize, f64)>,
    }

    impl Learner for Script {
        fn act(&mut self, round: usize) -> Action {
            self.queries.push(round);
            Action::Arm(self.arms[(round - 1) % self.arms.len()])
        }
        fn observe(&mut self, round: usize, observed: f64) {
            self.feedback.push((round, observed));
        }
    }

    fn play(wrapper: &mut MiniBatch<Script>, observed: &[f64]) -> Vec<Action> {
        observed
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                let a = wrapper.act(i + 1);
                wrapper.observe(i + 1, o);
                a
            })
            .collect()
    }

    #[test]
    fn batch_repeats_inner_action() {
        let inner = Script {
            arms: vec![2, 0],
            ..Default::default()
        };
        let mut w = MiniBatch::new(inner, 3, 6, Action::Arm(0));
        let actions = play(&mut w, &[0.0; 6]);
        assert_eq!(&actions[..3], &[Action::Arm(2), Action::Arm(2), Action::Arm(2)]);
        assert_eq!(&actions[3..], &[Action::Arm(0), Action::Arm(0), Action::Arm(0)]);
    }

    #[test]
    fn leftover_rounds_do_not_query() {
        let inner = Script {
            arms: vec![0, 1, 2],
            ..Default::default()
        };
        let mut w = MiniBatch::new(inner, 3, 10, Action::Arm(0));
        let actions = play(&mut w, &[0.5; 10]);
        assert_eq!(w.batches(), 3);
        assert_eq!(w.inner().queries, vec![1, 2, 3]);
        assert_eq!(w.inner().feedback.len(), 3);
        assert_eq!(actions[9], actions[8]);
    }

    #[test]
    fn horizon_shorter_than_batch_plays_fallback() {
        let mut w = MiniBatch::new(Script { arms: vec![1], ..Default::default() }, 5, 3, Action::Arm(0));
        let actions = play(&mut w, &[0.1; 3]);
        assert!(actions.iter().all(|a| *a == Action::Arm(0)));
        assert_eq!(w.batches(), 0);
    }

    #[test]
    fn feedback_is_clipped_average() {
        let mut w = MiniBatch::new(Script { arms: vec![0], ..Default::default() }, 3, 6, Action::Arm(0));
        play(&mut w, &[1.0, 1.0, 0.9, 1.2, 1.0, 1.1]);
        let fed = w.feedback_log();
        assert!((fed[0] - 2.9 / 3.0).abs() < 1e-15);
        assert!((fed[0] - 0.9667).abs() < 1e-4);
        assert_eq!(fed[1], 1.0);
        let mut w = MiniBatch::new(Script { arms: vec![0], ..Default::default() }, 2, 2, Action::Arm(0));
        play(&mut w, &[0.0, 0.0]);
        assert_eq!(w.feedback_log(), &[0.0]);
    }

    #[test]
    fn unit_batch_is_identity() {
        let arms = vec![1, 0, 0, 1, 1];
        let mut w = MiniBatch::new(Script { arms: arms.clone(), ..Default::default() }, 1, 5, Action::Arm(0));
        let obs = [0.1, 0.2, 0.3, 0.4, 0.5];
        let actions = play(&mut w, &obs);
        assert_eq!(actions, arms.iter().map(|&a| Action::Arm(a)).collect::<Vec<_>>());
        let fed: Vec<f64> = w.inner().feedback.iter().map(|f| f.1).collect();
        assert_eq!(fed, obs.to_vec());
    }

    #[test]
    fn batch_size_selection() {
        assert_eq!(choose_tau(1_000_000, 8, 3, 0), 50);
        assert_eq!(choose_tau(8, 8, 5, 0), 6);
        assert_eq!(choose_tau(1, 2, 0, 0), 1);
        assert_eq!(choose_tau(1000, 2, 0, 9), 10);
        // 1000 / 2 = 500, cube root 7.937
        assert_eq!(choose_tau(1000, 2, 0, 0), 8);
        // K^{-19/3} shrinks the convex batch size to the clamp
        assert_eq!(choose_tau_bco(100_000, 2, 0, 0), 1);
        assert_eq!(choose_tau_bco(100_000, 2, 1, 0), 2);
        assert_eq!(choose_tau_bco(1_000_000, 1, 0, 0), 100);
    }
}
