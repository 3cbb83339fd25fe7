use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// An action played by the learner.
///
/// Arms are zero-based: arm `0` is the first of `K` arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Arm(usize),
    Point(Vec<f64>),
}

impl Action {
    pub fn arm(&self) -> Option<usize> {
        match self {
            Action::Arm(a) => Some(*a),
            Action::Point(_) => None,
        }
    }

    pub fn point(&self) -> Option<&[f64]> {
        match self {
            Action::Point(p) => Some(p),
            Action::Arm(_) => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Arm(a) => write!(f, "arm {a}"),
            Action::Point(p) => write!(f, "point {p:?}"),
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActionSpace {
    /// `K >= 2` arms.
    Discrete { arms: usize },
    /// Euclidean ball of the given radius in `R^dimension`. Policy and pseudo
    /// regret minimize over the finite `comparator_grid`.
    ConvexBall {
        dimension: usize,
        radius: f64,
        comparator_grid: Vec<Vec<f64>>,
    },
}

impl ActionSpace {
    pub fn discrete(arms: usize) -> Result<Self> {
        if arms < 2 {
            return Err(invalid("arms", format!("need at least 2 arms, got {arms}")));
        }
        Ok(ActionSpace::Discrete { arms })
    }

    pub fn ball(dimension: usize, radius: f64, comparator_grid: Vec<Vec<f64>>) -> Result<Self> {
        if dimension < 1 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        for p in &comparator_grid {
            if p.len() != dimension {
                return Err(invalid("comparator_grid", "point has the wrong dimension"));
            }
            if norm(p) > radius * (1.0 + 1e-12) {
                return Err(invalid(
                    "comparator_grid",
                    format!("point {p:?} lies outside the ball of radius {radius}"),
                ));
            }
        }
        if comparator_grid.is_empty() {
            return Err(invalid("comparator_grid", "must contain at least one point"));
        }
        Ok(ActionSpace::ConvexBall {
            dimension,
            radius,
            comparator_grid,
        })
    }

    /// Ball whose comparator grid is the cubic lattice with `per_axis` points per
    /// coordinate, restricted to the ball.
    pub fn ball_with_lattice(dimension: usize, radius: f64, per_axis: usize) -> Result<Self> {
        if per_axis < 2 {
            return Err(invalid("per_axis", "need at least 2 lattice points per axis"));
        }
        let coords: Vec<f64> = (0..per_axis)
            .map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
            .collect();
        let mut grid = Vec::new();
        let mut index = vec![0usize; dimension];
        loop {
            let p: Vec<f64> = index.iter().map(|&i| coords[i]).collect();
            if norm(&p) <= radius {
                grid.push(p);
            }
            let mut k = 0;
            while k < dimension {
                index[k] += 1;
                if index[k] < per_axis {
                    break;
                }
                index[k] = 0;
                k += 1;
            }
            if k == dimension {
                break;
            }
        }
        Self::ball(dimension, radius, grid)
    }

    /// Number of arms, or the dimension of the ball.
    pub fn size(&self) -> usize {
        match self {
            ActionSpace::Discrete { arms } => *arms,
            ActionSpace::ConvexBall { dimension, .. } => *dimension,
        }
    }

    pub fn contains(&self, action: &Action) -> bool {
        match (self, action) {
            (ActionSpace::Discrete { arms }, Action::Arm(a)) => a < arms,
            (
                ActionSpace::ConvexBall {
                    dimension, radius, ..
                },
                Action::Point(p),
            ) => p.len() == *dimension && p.iter().all(|v| v.is_finite()) && norm(p) <= *radius * (1.0 + 1e-9),
            _ => false,
        }
    }

    /// Comparators used by the regret metrics: every arm, or the comparator grid.
    pub fn comparators(&self) -> Vec<Action> {
        match self {
            ActionSpace::Discrete { arms } => (0..*arms).map(Action::Arm).collect(),
            ActionSpace::ConvexBall {
                comparator_grid, ..
            } => comparator_grid.iter().cloned().map(Action::Point).collect(),
        }
    }

    /// A canonical action: arm 0 or the centre of the ball.
    pub fn default_action(&self) -> Action {
        match self {
            ActionSpace::Discrete { .. } => Action::Arm(0),
            ActionSpace::ConvexBall { dimension, .. } => Action::Point(vec![0.0; *dimension]),
        }
    }

    /// Uniform sample: a uniform arm, or a uniform point in the ball.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            ActionSpace::Discrete { arms } => Action::Arm(rng.random_range(0..*arms)),
            ActionSpace::ConvexBall {
                dimension, radius, ..
            } => {
                let dir = unit_sphere(*dimension, rng);
                let r = radius * rng.random::<f64>().powf(1.0 / *dimension as f64);
                Action::Point(dir.into_iter().map(|v| v * r).collect())
            }
        }
    }
}

/// Uniform direction on the unit sphere in `R^dimension`.
pub fn unit_sphere<R: Rng + ?Sized>(dimension: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dimension).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{stream_rng, Stream};

    #[test]
    fn discrete_needs_two_arms() {
        assert!(ActionSpace::discrete(1).is_err());
        let space = ActionSpace::discrete(3).unwrap();
        assert!(space.contains(&Action::Arm(2)));
        assert!(!space.contains(&Action::Arm(3)));
        assert!(!space.contains(&Action::Point(vec![0.0])));
        assert_eq!(space.comparators().len(), 3);
    }

    #[test]
    fn grid_points_must_be_inside_ball() {
        assert!(ActionSpace::ball(2, 1.0, vec![vec![1.0, 1.0]]).is_err());
        assert!(ActionSpace::ball(2, 0.0, vec![vec![0.0, 0.0]]).is_err());
        let space = ActionSpace::ball_with_lattice(2, 1.0, 5).unwrap();
        for c in space.comparators() {
            assert!(norm(c.point().unwrap()) <= 1.0);
        }
        // 25 lattice points minus the 12 with one coordinate at +-1 and the other nonzero
        assert_eq!(space.comparators().len(), 13);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let space = ActionSpace::ball_with_lattice(3, 0.5, 3).unwrap();
        let mut rng = stream_rng(1, Stream::MemoryProbe);
        for _ in 0..1000 {
            assert!(space.contains(&space.sample(&mut rng)));
        }
    }
}
