//! KL and total-variation tools for Gaussians clamped to an interval.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::normal::{log_cdf, pdf};
use super::quadrature::integrate_panels;
use crate::adversaries::lower_bound::MAX_GAP;
use crate::error::{invalid, Result};

/// Absolute tolerance per quadrature panel.
pub const PANEL_TOLERANCE: f64 = 1e-10;

/// Law of `clamp(X, a, b)` for `X ~ N(mean, sigma^2)`: density on `(a, b)` plus
/// atoms at both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredGaussian {
    pub mean: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

impl CensoredGaussian {
    pub fn new(mean: f64, sigma: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        if !(upper > lower) {
            return Err(invalid("bounds", format!("need a < b, got [{lower}, {upper}]")));
        }
        if !mean.is_finite() {
            return Err(invalid("mean", "must be finite"));
        }
        Ok(Self { mean, sigma, lower, upper })
    }

    /// `ln P(X <= a)`.
    pub fn log_lower_atom(&self) -> f64 {
        log_cdf((self.lower - self.mean) / self.sigma)
    }

    /// `ln P(X >= b)`.
    pub fn log_upper_atom(&self) -> f64 {
        log_cdf((self.mean - self.upper) / self.sigma)
    }

    /// Density of the continuous part on `(a, b)`.
    pub fn density(&self, x: f64) -> f64 {
        pdf((x - self.mean) / self.sigma) / self.sigma
    }

    /// Atoms plus the integrated continuous part; 1 up to quadrature error.
    pub fn total_mass(&self) -> f64 {
        let body = integrate_panels(|x| self.density(x), self.lower, self.upper, self.sigma, PANEL_TOLERANCE);
        self.log_lower_atom().exp() + self.log_upper_atom().exp() + body
    }
}

/// `p ln(p / q)` from logarithms, with `0 ln 0 = 0`.
fn atom_term(log_p: f64, log_q: f64) -> f64 {
    let p = log_p.exp();
    if p == 0.0 {
        0.0
    } else {
        p * (log_p - log_q)
    }
}

/// `KL(P || Q)`: quadrature over `(a, b)` plus the two atom terms.
pub fn censored_kl(p: &CensoredGaussian, q: &CensoredGaussian) -> Result<f64> {
    if p.sigma != q.sigma {
        return Err(invalid("sigma", format!("mismatched {} and {}", p.sigma, q.sigma)));
    }
    if p.lower != q.lower || p.upper != q.upper {
        return Err(invalid("bounds", "P and Q must share [a, b]"));
    }
    if !(p.upper > p.lower) {
        return Err(invalid("bounds", "need a < b"));
    }
    if p.mean == q.mean {
        return Ok(0.0);
    }
    let s2 = 2.0 * p.sigma * p.sigma;
    let log_ratio = |x: f64| ((x - q.mean).powi(2) - (x - p.mean).powi(2)) / s2;
    let body = integrate_panels(
        |x| p.density(x) * log_ratio(x),
        p.lower,
        p.upper,
        p.sigma,
        PANEL_TOLERANCE,
    );
    let lower = atom_term(p.log_lower_atom(), q.log_lower_atom());
    let upper = atom_term(p.log_upper_atom(), q.log_upper_atom());
    Ok(body + lower + upper)
}

/// `(mu_p - mu_q)^2 / (2 sigma^2)`.
pub fn kl_upper_bound(mu_p: f64, mu_q: f64, sigma: f64) -> f64 {
    (mu_p - mu_q).powi(2) / (2.0 * sigma * sigma)
}

/// Pinsker: `TV <= sqrt(KL / 2)`.
pub fn pinsker_tv(kl: f64) -> f64 {
    (kl.max(0.0) / 2.0).sqrt()
}

/// `(eps / sigma) * sqrt(2 * width * eps * E[T_i] / (1 - 8 eps))`.
pub fn tv_budget(epsilon: f64, sigma: f64, width: f64, expected_pulls: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < MAX_GAP) {
        return Err(invalid("epsilon", format!("must lie in (0, 1/8), got {epsilon}")));
    }
    if !(sigma > 0.0) {
        return Err(invalid("sigma", "must be positive"));
    }
    if !(width >= 1.0) {
        return Err(invalid("width", "must be at least 1"));
    }
    if !(expected_pulls >= 0.0) {
        return Err(invalid("expected_pulls", "must be nonnegative"));
    }
    Ok(epsilon / sigma * (2.0 * width * epsilon * expected_pulls / (1.0 - 8.0 * epsilon)).sqrt())
}

/// Total variation between the empirical histograms of two samples, binned at
/// `bin_width`. Biased upwards by sampling noise; a diagnostic only.
pub fn histogram_tv(p: &[f64], q: &[f64], bin_width: f64) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(invalid("samples", "both samples must be nonempty"));
    }
    if !(bin_width > 0.0) {
        return Err(invalid("bin_width", "must be positive"));
    }
    let mut bins: HashMap<i64, (f64, f64)> = HashMap::new();
    let (wp, wq) = (1.0 / p.len() as f64, 1.0 / q.len() as f64);
    for &x in p {
        bins.entry((x / bin_width).floor() as i64).or_default().0 += wp;
    }
    for &x in q {
        bins.entry((x / bin_width).floor() as i64).or_default().1 += wq;
    }
    Ok(0.5 * bins.values().map(|(a, b)| (a - b).abs()).sum::<f64>())
}
