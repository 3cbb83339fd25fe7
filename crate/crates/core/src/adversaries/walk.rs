//! Multi-scale Gaussian random walk and its parent functions.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::seed::{CounterRng, Stream};

/// 2-adic valuation: the largest `i` with `2^i` dividing `t`.
pub fn delta(t: u64) -> u32 {
    assert!(t >= 1, "delta is defined for t >= 1");
    t.trailing_zeros()
}

/// `rho*(t) = t - 2^delta(t)`, i.e. `t` with its lowest set bit cleared.
pub fn parent(t: u64) -> u64 {
    assert!(t >= 1, "parent is defined for t >= 1");
    t - (1u64 << delta(t))
}

/// Assigns each round `t >= 1` a parent `rho(t) < t`.
pub trait ParentFunction {
    fn parent_of(&self, t: u64) -> u64;
}

/// The multi-scale parent `rho*`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MultiScale;

impl ParentFunction for MultiScale {
    fn parent_of(&self, t: u64) -> u64 {
        parent(t)
    }
}

/// `rho(t) = t - 1`: an ordinary random walk.
#[derive(Debug, Clone, Copy, Default)]
pub struct Chain;

impl ParentFunction for Chain {
    fn parent_of(&self, t: u64) -> u64 {
        t - 1
    }
}

/// `rho(t) = 0`: i.i.d. samples around zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct Flat;

impl ParentFunction for Flat {
    fn parent_of(&self, _t: u64) -> u64 {
        0
    }
}

/// `|cut(t)|` for every `t in [T]`, where `cut(t) = {s in [T] : rho(s) <= t < s}`.
/// Index `i` holds `t = i + 1`. Each `s` covers `t in [max(rho(s), 1), s - 1]`,
/// accumulated with a difference array.
pub fn cut_sizes<P: ParentFunction + ?Sized>(rho: &P, horizon: u64) -> Vec<u64> {
    let n = horizon as usize;
    let mut diff = vec![0i64; n + 2];
    for s in 1..=horizon {
        let p = rho.parent_of(s);
        debug_assert!(p < s);
        let lo = p.max(1) as usize;
        let hi = (s - 1) as usize;
        if lo <= hi {
            diff[lo] += 1;
            diff[hi + 1] -= 1;
        }
    }
    let mut sizes = Vec::with_capacity(n);
    let mut running = 0i64;
    for d in diff.iter().take(n + 1).skip(1) {
        running += d;
        sizes.push(running as u64);
    }
    sizes
}

/// Width `max_t |cut(t)|` of a parent function over horizon `T`.
pub fn width<P: ParentFunction + ?Sized>(rho: &P, horizon: u64) -> u64 {
    cut_sizes(rho, horizon).into_iter().max().unwrap_or(0)
}

/// `floor(log2 T) + 1`, the width ceiling for `rho*`.
pub fn width_bound(horizon: u64) -> u64 {
    assert!(horizon >= 1);
    u64::from(63 - horizon.leading_zeros()) + 1
}

/// Level `sigma * sqrt(2 (ln T + 1) ln(T / delta))` that `max_t |W_t|` stays under
/// with probability at least `1 - delta`. Natural logarithms throughout.
pub fn drift_threshold(sigma: f64, horizon: u64, delta_prob: f64) -> Result<f64> {
    if !(delta_prob > 0.0 && delta_prob < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta_prob}")));
    }
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    if sigma < 0.0 {
        return Err(invalid("sigma", "must be nonnegative"));
    }
    let t = horizon as f64;
    Ok(sigma * (2.0 * (t.ln() + 1.0) * (t / delta_prob).ln()).sqrt())
}

/// `W_0 = 0`, `W_t = W_{rho*(t)} + xi_t` with `xi_t ~ N(0, sigma^2)`.
///
/// Increments are counter-based on `(seed, t)`, so the realized walk does not
/// depend on query order. Values for `t in [0, T]` are materialized at
/// construction and every query returns the same number.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiScaleWalk {
    sigma: f64,
    increments: Vec<f64>,
    values: Vec<f64>,
}

impl MultiScaleWalk {
    pub fn sample(sigma: f64, horizon: usize, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be a nonnegative number, got {sigma}")));
        }
        let family = CounterRng::new(seed, Stream::Walk);
        let mut increments = Vec::with_capacity(horizon + 1);
        increments.push(0.0);
        for t in 1..=horizon {
            let z: f64 = family.at(t as u64).sample(StandardNormal);
            increments.push(sigma * z);
        }
        Ok(Self::materialize(sigma, increments))
    }

    /// Walk with explicit increments `xi_1, ..., xi_T`.
    pub fn from_increments(increments: &[f64]) -> Self {
        let mut all = Vec::with_capacity(increments.len() + 1);
        all.push(0.0);
        all.extend_from_slice(increments);
        Self::materialize(f64::NAN, all)
    }

    fn materialize(sigma: f64, increments: Vec<f64>) -> Self {
        let mut values = vec![0.0; increments.len()];
        for t in 1..increments.len() {
            values[t] = values[parent(t as u64) as usize] + increments[t];
        }
        Self {
            sigma,
            increments,
            values,
        }
    }

    /// NaN for walks built from explicit increments.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> usize {
        self.increments.len() - 1
    }

    /// `xi_t`; `xi_0 = 0`.
    pub fn increment(&self, t: usize) -> f64 {
        self.increments[t]
    }

    /// `W_t` for `0 <= t <= T`.
    pub fn value(&self, t: usize) -> f64 {
        self.values[t]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_adic_valuation() {
        assert_eq!(delta(1), 0);
        assert_eq!(delta(12), 2);
        assert_eq!(delta(8), 3);
    }

    #[test]
    fn multiscale_parent() {
        assert_eq!(parent(1), 0);
        assert_eq!(parent(12), 8);
        assert_eq!(parent(8), 0);
        for t in 1..5000u64 {
            assert!(parent(t) < t);
        }
    }

    fn brute_width<P: ParentFunction>(rho: &P, horizon: u64) -> u64 {
        (1..=horizon)
            .map(|t| {
                (1..=horizon)
                    .filter(|&s| rho.parent_of(s) <= t && t < s)
                    .count() as u64
            })
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn width_of_small_horizons() {
        assert_eq!(width(&MultiScale, 1), 0);
        assert!(width(&MultiScale, 1) <= width_bound(1));
        // cut(4) at T=8 is {5, 6, 8}: parents 4, 4, 0 (7 has parent 6)
        assert_eq!(cut_sizes(&MultiScale, 8)[3], 3);
        assert_eq!(width(&MultiScale, 8), brute_width(&MultiScale, 8));
        assert_eq!(width(&MultiScale, 8), 3);
        assert!(width(&MultiScale, 8) <= width_bound(8));
    }

    #[test]
    fn difference_array_matches_brute_force() {
        for horizon in 1..=200 {
            assert_eq!(width(&MultiScale, horizon), brute_width(&MultiScale, horizon));
            assert_eq!(width(&Chain, horizon), brute_width(&Chain, horizon));
            assert_eq!(width(&Flat, horizon), brute_width(&Flat, horizon));
        }
        assert_eq!(width(&Chain, 50), 1);
        assert_eq!(width(&Flat, 50), 49);
    }

    #[test]
    fn zero_increments_give_zero_walk() {
        let walk = MultiScaleWalk::from_increments(&[0.0; 32]);
        assert!((0..=32).all(|t| walk.value(t) == 0.0));
        let walk = MultiScaleWalk::sample(0.0, 32, 9).unwrap();
        assert_eq!(walk.max_abs(), 0.0);
    }

    #[test]
    fn walk_unrolls_through_parents() {
        let xi = [0.1, -0.2, 0.4, 0.8, 1.6];
        let walk = MultiScaleWalk::from_increments(&xi);
        assert_eq!(walk.value(3), xi[1] + xi[2]);
        assert_eq!(walk.value(4), xi[3]);
        assert_eq!(walk.value(5), xi[3] + xi[4]);
    }

    #[test]
    fn sampled_walk_is_reproducible() {
        let a = MultiScaleWalk::sample(0.1, 100, 42).unwrap();
        let b = MultiScaleWalk::sample(0.1, 100, 42).unwrap();
        assert_eq!(a, b);
        // a longer horizon realizes the same prefix
        let c = MultiScaleWalk::sample(0.1, 300, 42).unwrap();
        assert!((0..=100).all(|t| a.value(t) == c.value(t)));
        let d = MultiScaleWalk::sample(0.1, 100, 43).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn drift_threshold_closed_form() {
        assert_eq!(drift_threshold(0.0, 16, 0.1).unwrap(), 0.0);
        let t = 16f64;
        let direct = 0.1 * (2.0 * (t.ln() + 1.0) * (t / 0.1).ln()).sqrt();
        // second route: sigma * sqrt(2 (ln T + 1) (ln T - ln delta))
        let expanded = 0.1 * (2.0 * (4.0 * 2f64.ln() + 1.0) * (4.0 * 2f64.ln() + 10f64.ln())).sqrt();
        let got = drift_threshold(0.1, 16, 0.1).unwrap();
        assert!((got - direct).abs() < 1e-15);
        assert!((got - expanded).abs() < 1e-12);
        assert!((got - 0.618_814_083_530_066).abs() < 1e-12);
        let near_one = drift_threshold(0.3, 100, 1.0 - 1e-12).unwrap();
        let limit = 0.3 * (2.0 * (100f64.ln() + 1.0) * 100f64.ln()).sqrt();
        assert!((near_one - limit).abs() < 1e-9);
        assert!(drift_threshold(0.1, 16, 1.0).is_err());
        assert!(drift_threshold(0.1, 16, 0.0).is_err());
    }
}
