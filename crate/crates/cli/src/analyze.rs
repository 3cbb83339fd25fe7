//! Scaling-law fits over result CSVs, with a seed bootstrap.

use std::collections::BTreeMap;
use std::io::Read;

use cadf_core::analysis::{fit_exponent, ScalingFit};
use cadf_core::seed::{stream_rng, Stream};
use rand::Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// One `(T, seed, value)` triple pulled from a result CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub horizon: usize,
    pub seed: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bootstrap {
    pub replicates: usize,
    /// Replicates whose fit succeeded (a resample can average to zero regret).
    pub valid: usize,
    pub alpha_mean: f64,
    pub alpha_sd: f64,
    pub alpha_low: f64,
    pub alpha_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub metric: String,
    pub horizons: usize,
    pub seeds: usize,
    pub alpha: f64,
    pub multiplier: f64,
    pub r_squared: f64,
    /// `(T, mean metric)` pairs the fit used.
    pub points: Vec<(f64, f64)>,
    pub bootstrap: Option<Bootstrap>,
}

/// Reads the `T`, `seed` and `metric` columns of a result CSV.
pub fn read_samples<R: Read>(input: R, metric: &str) -> CliResult<Vec<Sample>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("malformed CSV header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Input(format!("CSV is missing column `{name}`")))
    };
    let (t_col, seed_col, value_col) = (column("T")?, column("seed")?, column(metric)?);
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| CliError::Input(format!("malformed CSV at line {line}: {e}")))?;
        let field = |col: usize, name: &str| {
            record
                .get(col)
                .ok_or_else(|| CliError::Input(format!("line {line}: no `{name}` field")))
        };
        let bad = |name: &str, v: &str| CliError::Input(format!("line {line}: bad `{name}` value `{v}`"));
        let t = field(t_col, "T")?;
        let s = field(seed_col, "seed")?;
        let v = field(value_col, metric)?;
        let value: f64 = v.parse().map_err(|_| bad(metric, v))?;
        if !value.is_finite() {
            return Err(bad(metric, v));
        }
        samples.push(Sample {
            horizon: t.parse().map_err(|_| bad("T", t))?,
            seed: s.parse().map_err(|_| bad("seed", s))?,
            value,
        });
    }
    Ok(samples)
}

fn mean_points(groups: &BTreeMap<usize, Vec<(u64, f64)>>, weights: Option<&BTreeMap<u64, usize>>) -> Vec<(f64, f64)> {
    groups
        .iter()
        .filter_map(|(&t, rows)| {
            let (mut sum, mut n) = (0.0, 0usize);
            for &(seed, v) in rows {
                let w = weights.map_or(1, |w| w.get(&seed).copied().unwrap_or(0));
                sum += w as f64 * v;
                n += w;
            }
            (n > 0).then(|| (t as f64, sum / n as f64))
        })
        .collect()
}

/// Averages the metric per horizon and fits `mean ~ C T^alpha`. With
/// `replicates > 0` and at least two seeds, seeds are resampled with replacement
/// (jointly across horizons) to give a spread for alpha.
pub fn analyze_samples(samples: &[Sample], metric: &str, replicates: usize, seed: u64) -> CliResult<Analysis> {
    let mut groups: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.horizon).or_default().push((s.seed, s.value));
    }
    if groups.len() < 3 {
        return Err(CliError::Input(format!("need at least 3 horizons, found {}", groups.len())));
    }
    let points = mean_points(&groups, None);
    let ScalingFit {
        alpha,
        multiplier,
        r_squared,
        points,
    } = fit_exponent(&points).map_err(|e| CliError::Input(format!("cannot fit {metric}: {e}")))?;

    let mut seeds: Vec<u64> = samples.iter().map(|s| s.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();

    let bootstrap = (replicates > 0 && seeds.len() > 1).then(|| {
        let mut rng = stream_rng(seed, Stream::Exploration);
        let mut alphas = Vec::with_capacity(replicates);
        for _ in 0..replicates {
            let mut weights = BTreeMap::new();
            for _ in 0..seeds.len() {
                *weights.entry(seeds[rng.random_range(0..seeds.len())]).or_insert(0) += 1;
            }
            let pts = mean_points(&groups, Some(&weights));
            if let Ok(fit) = fit_exponent(&pts) {
                alphas.push(fit.alpha);
            }
        }
        alphas.sort_by(f64::total_cmp);
        let n = alphas.len();
        let quantile = |q: f64| if n == 0 { f64::NAN } else { alphas[((n - 1) as f64 * q).round() as usize] };
        let mean = alphas.iter().sum::<f64>() / n as f64;
        let var = alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        Bootstrap {
            replicates,
            valid: n,
            alpha_mean: mean,
            alpha_sd: var.sqrt(),
            alpha_low: quantile(0.025),
            alpha_high: quantile(0.975),
        }
    });

    Ok(Analysis {
        metric: metric.to_string(),
        horizons: groups.len(),
        seeds: seeds.len(),
        alpha,
        multiplier,
        r_squared,
        points,
        bootstrap,
    })
}
