//! Power-law fit of regret curves.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `regret ~ multiplier * T^alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub multiplier: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least squares of `ln regret` on `ln T`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(invalid("points", format!("need at least 3 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(invalid("points", "horizons must be strictly increasing"));
    }
    if let Some(&(t, r)) = points.iter().find(|p| !(p.0 > 0.0)) {
        return Err(invalid("points", format!("horizon {t} (regret {r}) is not positive")));
    }
    if let Some(&(t, r)) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(invalid("points", format!("regret {r} at T = {t} is not positive")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let residual: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - alpha * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - residual / syy };
    Ok(ScalingFit {
        alpha,
        multiplier: intercept.exp(),
        r_squared,
        points: points.to_vec(),
    })
}
