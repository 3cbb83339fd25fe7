//! One-point gradient-estimate learner for convex losses on a Euclidean ball.
//!
//! Each round plays `x + delta * u` for a uniform unit direction `u`, then moves
//! `x` along `-(K / delta) * loss * u` and projects back onto the ball of
//! radius `r - delta`, so every played point lies in the ball of radius `r`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::action::{norm, unit_sphere, Action};
use crate::error::{invalid, Result};
use crate::game::Learner;
use crate::seed::{stream_rng, Stream};

/// One-point estimate `(K / delta) * loss * u`.
pub fn one_point_gradient(exploration: f64, loss: f64, direction: &[f64]) -> Vec<f64> {
    let scale = direction.len() as f64 / exploration * loss;
    direction.iter().map(|u| scale * u).collect()
}

fn project(x: &mut [f64], radius: f64) {
    let n = norm(x);
    if n > radius {
        let s = radius / n;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

#[derive(Debug, Clone)]
pub struct Fkm {
    radius: f64,
    exploration: f64,
    step: f64,
    point: Vec<f64>,
    direction: Vec<f64>,
    rng: ChaCha8Rng,
}

impl Fkm {
    pub fn new(dimension: usize, radius: f64, exploration: f64, step: f64, seed: u64) -> Result<Self> {
        if dimension < 1 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if !(radius > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
        if !(exploration > 0.0) {
            return Err(invalid("exploration", format!("must be positive, got {exploration}")));
        }
        if exploration >= radius {
            return Err(invalid(
                "exploration",
                format!("radius {exploration} must be smaller than the ball radius {radius}"),
            ));
        }
        if !(step > 0.0) {
            return Err(invalid("step", format!("must be positive, got {step}")));
        }
        Ok(Self {
            radius,
            exploration,
            step,
            point: vec![0.0; dimension],
            direction: vec![0.0; dimension],
            rng: stream_rng(seed, Stream::Learner),
        })
    }

    /// Default schedule for `J` inner rounds: `delta = r * min(1/2, J^{-1/4})`,
    /// `step = r * J^{-3/4}`.
    pub fn with_schedule(dimension: usize, radius: f64, rounds: usize, seed: u64) -> Result<Self> {
        let j = rounds.max(1) as f64;
        let exploration = radius * j.powf(-0.25).min(0.5);
        let step = radius * j.powf(-0.75);
        Self::new(dimension, radius, exploration, step, seed)
    }

    pub fn dimension(&self) -> usize {
        self.point.len()
    }

    pub fn exploration(&self) -> f64 {
        self.exploration
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Current centre `x`.
    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// Draws a direction and returns the point to play.
    pub fn propose<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        self.direction = unit_sphere(self.dimension(), rng);
        self.point
            .iter()
            .zip(&self.direction)
            .map(|(x, u)| x + self.exploration * u)
            .collect()
    }

    /// Projected step along the one-point estimate for the last proposal.
    pub fn update(&mut self, loss: f64) {
        let g = one_point_gradient(self.exploration, loss.clamp(0.0, 1.0), &self.direction);
        for (x, gi) in self.point.iter_mut().zip(g) {
            *x -= self.step * gi;
        }
        project(&mut self.point, self.radius - self.exploration);
    }
}

impl Learner for Fkm {
    fn act(&mut self, _round: usize) -> Action {
        let mut rng = self.rng.clone();
        let p = self.propose(&mut rng);
        self.rng = rng;
        Action::Point(p)
    }

    fn observe(&mut self, _round: usize, observed: f64) {
        self.update(observed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_exploration() {
        assert!(Fkm::new(2, 1.0, 0.0, 0.1, 0).is_err());
        assert!(Fkm::new(2, 1.0, 1.0, 0.1, 0).is_err());
        assert!(Fkm::new(2, 1.0, 0.5, 0.0, 0).is_err());
        assert!(Fkm::new(2, 1.0, 0.5, 0.1, 0).is_ok());
    }

    #[test]
    fn played_points_stay_in_ball() {
        let mut fkm = Fkm::new(3, 1.0, 0.2, 0.5, 1).unwrap();
        for t in 1..=2000 {
            let a = fkm.act(t);
            assert!(norm(a.point().unwrap()) <= 1.0 + 1e-12);
            fkm.observe(t, 1.0);
            assert!(norm(fkm.point()) <= 0.8 + 1e-12);
        }
    }

    #[test]
    fn linear_loss_gradient_is_unbiased() {
        // E[(K/delta) <c, x + delta u> u] = c for a uniform unit direction u
        let c = [0.3, -0.2, 0.1];
        let x = [0.1, 0.1, -0.2];
        let delta = 0.25;
        let mut rng = stream_rng(9, Stream::Exploration);
        let n = 200_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let u = unit_sphere(3, &mut rng);
            let y: Vec<f64> = x.iter().zip(&u).map(|(xi, ui)| xi + delta * ui).collect();
            let f: f64 = y.iter().zip(&c).map(|(a, b)| a * b).sum();
            let g = one_point_gradient(delta, f, &u);
            for k in 0..3 {
                mean[k] += g[k] / n as f64;
            }
        }
        for k in 0..3 {
            assert!((mean[k] - c[k]).abs() < 0.01, "{mean:?}");
        }
    }
}
