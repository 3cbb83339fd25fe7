use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::action::Action;
use crate::error::{invalid, Error, Result};
use crate::game::Learner;
use crate::seed::{stream_rng, Stream};

/// Exponents below `-MAX_EXPONENT` are floored so every probability stays positive.
const MAX_EXPONENT: f64 = 700.0;

/// Fixed-horizon rate `sqrt(2 ln K / (J K))`.
pub fn exp3_learning_rate(arms: usize, rounds: usize) -> f64 {
    let k = arms as f64;
    (2.0 * k.ln() / (rounds.max(1) as f64 * k)).sqrt()
}

/// EXP3 with importance-weighted loss estimates.
///
/// The probability of arm `i` is proportional to `exp(-eta * L_i)` where `L_i`
/// is the cumulative estimate `sum loss / p` over the rounds `i` was played.
/// Estimates are stored relative to their minimum; that shift leaves the
/// distribution unchanged.
#[derive(Debug, Clone)]
pub struct Exp3 {
    eta: f64,
    estimates: Vec<f64>,
    probabilities: Vec<f64>,
    rng: ChaCha8Rng,
    pending: Option<(usize, f64)>,
}

impl Exp3 {
    /// `arms >= 2`, `rounds = J >= 1` inner rounds.
    pub fn new(arms: usize, rounds: usize, seed: u64) -> Result<Self> {
        if rounds < 1 {
            return Err(invalid("rounds", "need at least one round"));
        }
        Self::with_rate(arms, exp3_learning_rate(arms, rounds), seed)
    }

    pub fn with_rate(arms: usize, eta: f64, seed: u64) -> Result<Self> {
        if arms < 2 {
            return Err(invalid("arms", format!("need at least 2 arms, got {arms}")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid("eta", format!("must be positive, got {eta}")));
        }
        Ok(Self {
            eta,
            estimates: vec![0.0; arms],
            probabilities: vec![1.0 / arms as f64; arms],
            rng: stream_rng(seed, Stream::Learner),
            pending: None,
        })
    }

    pub fn arms(&self) -> usize {
        self.probabilities.len()
    }

    pub fn learning_rate(&self) -> f64 {
        self.eta
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    /// Inverse-CDF draw for a uniform `u in [0, 1)`: the arm and the probability
    /// it was drawn with.
    pub fn draw(&self, u: f64) -> (usize, f64) {
        let mut acc = 0.0;
        for (arm, &p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return (arm, p);
            }
        }
        // u within rounding of 1: take the last arm with positive mass
        let arm = self.probabilities.len() - 1;
        (arm, self.probabilities[arm])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        self.draw(rng.random::<f64>())
    }

    /// Adds `loss / probability` to the arm's estimate and recomputes the softmax.
    pub fn update(&mut self, arm: usize, loss: f64, probability: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::FeedbackOutOfRange { value: loss });
        }
        if arm >= self.arms() {
            return Err(invalid("arm", format!("arm {arm} out of range")));
        }
        if !(probability > 0.0 && probability <= 1.0) {
            return Err(invalid("probability", format!("must lie in (0, 1], got {probability}")));
        }
        self.estimates[arm] += loss / probability;
        self.renormalize();
        Ok(())
    }

    fn renormalize(&mut self) {
        let min = self.estimates.iter().copied().fold(f64::INFINITY, f64::min);
        let cap = MAX_EXPONENT / self.eta;
        for e in &mut self.estimates {
            *e = (*e - min).min(cap);
        }
        let weights: Vec<f64> = self.estimates.iter().map(|e| (-self.eta * e).exp()).collect();
        let total: f64 = weights.iter().sum();
        for (p, w) in self.probabilities.iter_mut().zip(weights) {
            *p = w / total;
        }
    }
}

impl Learner for Exp3 {
    fn act(&mut self, _round: usize) -> Action {
        let u = self.rng.random::<f64>();
        let (arm, p) = self.draw(u);
        self.pending = Some((arm, p));
        Action::Arm(arm)
    }

    /// Observations are clipped to `[0, 1]` before the update.
    fn observe(&mut self, _round: usize, observed: f64) {
        let (arm, p) = self.pending.take().expect("observe called before act");
        self.update(arm, observed.clamp(0.0, 1.0), p)
            .expect("clipped feedback is always valid");
    }
}
