//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any fails.

use std::time::{Duration, Instant};

use cadf_cli::{analyze_samples, run_experiment, ExperimentSpec, RunRecord, Sample, SpecOverrides};
use cadf_core::adversaries::walk::MultiScale;
use cadf_core::adversaries::{
    default_lb_params, drift_threshold, width, DelayStateMachine, IidBernoulliLoss, LowerBoundLoss, MultiScaleWalk,
    NoDelay, ParityDelay, Theorem1Loss,
};
use cadf_core::analysis::{censored_kl, kl_upper_bound, CensoredGaussian};
use cadf_core::learners::{Exp3, LookupTableLearner, MiniBatch, UniformRandom};
use cadf_core::{policy_regret, run_game, Action, ActionSpace, GameConfig, Learner, LossState, Transcript};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn timed<F: FnOnce() -> Outcome>(limit: Option<Duration>, f: F) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{}; {:.1} s", o.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            o.passed = false;
            o.detail = format!("{} exceeds the {} s limit", o.detail, limit.as_secs());
        }
    }
    o
}

fn spec(adversary: &str, learner: &str, horizons: Vec<usize>, seeds: usize) -> ExperimentSpec {
    SpecOverrides {
        adversary: Some(adversary.into()),
        learner: Some(learner.into()),
        horizons,
        arms: Some(2),
        seeds: Some(seeds),
        seed_base: Some(0),
        ..Default::default()
    }
    .resolve()
    .expect("acceptance specs are valid")
}

fn alternating(horizon: usize) -> Vec<f64> {
    (1..=horizon).map(|t| if t % 2 == 1 { 0.0 } else { 1.0 }).collect()
}

fn thm1_game(learner: &mut dyn Learner, z: usize, horizon: usize) -> Transcript {
    let cfg = GameConfig::new(horizon, ActionSpace::discrete(2).unwrap(), 2, 1, 0).unwrap();
    run_game(&cfg, learner, &Theorem1Loss::new(z).unwrap(), &mut ParityDelay).unwrap()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn criterion_1() -> Outcome {
    let horizon = 10_000;
    let records = run_experiment(&spec("thm1", "uniform", vec![horizon], 100)).unwrap();
    let pseudo: Vec<f64> = records.iter().map(|r| r.row.pseudo_regret).collect();
    let (mean, sd) = mean_sd(&pseudo);
    let se = sd / (pseudo.len() as f64).sqrt();
    // each odd round is a mistake with probability 1/2 and costs 1
    let target = horizon as f64 / 4.0;
    let zero = records.iter().filter(|r| r.row.policy_regret == 0.0).count();
    outcome(
        (mean - target).abs() <= 3.0 * se && zero == records.len(),
        format!(
            "mean pseudo regret {mean:.1} vs {target} (3 SE = {:.1}); policy regret 0 in {zero}/{} runs",
            3.0 * se,
            records.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let horizon = 10_000;
    let expected = alternating(horizon);
    let mut random_ok = 0;
    for z in 0..2 {
        for seed in 0..100u64 {
            let mut learner = UniformRandom::new(ActionSpace::discrete(2).unwrap(), 1000 + seed);
            random_ok += (thm1_game(&mut learner, z, horizon).observed == expected) as usize;
        }
    }
    // a deterministic learner is a map from observation histories to arms, and
    // only the entries on the realized path are read: enumerating those entries
    // (with either default elsewhere) covers every learner
    let (mut tables, mut tables_ok) = (0usize, 0usize);
    for t in 1..=10 {
        let expected = alternating(t);
        for code in 0..(1u32 << t) {
            for default in 0..2 {
                for z in 0..2 {
                    let mut learner = LookupTableLearner::new(default);
                    for r in 0..t {
                        learner.insert(&expected[..r], ((code >> r) & 1) as usize);
                    }
                    tables += 1;
                    tables_ok += (thm1_game(&mut learner, z, t).observed == expected) as usize;
                }
            }
        }
    }
    outcome(
        random_ok == 200 && tables_ok == tables,
        format!("random policies {random_ok}/200 alternate; lookup tables {tables_ok}/{tables}"),
    )
}

fn criterion_3() -> Outcome {
    let horizon = 1usize << 16;
    let (eps, sigma) = default_lb_params(2, horizon).unwrap();
    let space = ActionSpace::discrete(2).unwrap();
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut z_counts = [0usize; 3];
    for seed in 0..50u64 {
        let loss = LowerBoundLoss::sample(2, horizon, eps, sigma, seed).unwrap();
        let cfg = GameConfig::new(horizon, space.clone(), 2, 0, seed).unwrap();
        let mut learner = UniformRandom::new(space.clone(), seed);
        let tr = run_game(&cfg, &mut learner, &loss, &mut DelayStateMachine::new(loss.clone())).unwrap();
        z_counts[loss.best_arm().map_or(0, |z| z + 1)] += 1;
        for t in 1..=horizon {
            let diag = tr.diagnostics[t - 1];
            let carry = diag.carry_in.unwrap();
            if !(0.0..=0.25).contains(&carry) {
                failures.push(format!("seed {seed} t={t}: carry {carry}"));
                break;
            }
            let low = if diag.state == Some(LossState::LowLoss) { eps } else { 0.0 };
            let expected = (loss.walk().value(t) + 0.75 - low).clamp(0.5, 1.0);
            if (tr.observed[t - 1] - expected).abs() > 1e-12 {
                failures.push(format!("seed {seed} t={t}: observed {} vs {expected}", tr.observed[t - 1]));
                break;
            }
            let s = &tr.splits[t - 1];
            let sum: f64 = s.components.iter().sum();
            if s.components.len() != 2 || s.components.iter().any(|&c| c < -1e-12) || (sum - tr.true_losses[t - 1]).abs() > 1e-12 {
                failures.push(format!("seed {seed} t={t}: invalid split {:?}", s.components));
                break;
            }
        }
        let switches = tr.state_switches() as f64;
        match loss.best_arm() {
            None if switches != 0.0 => failures.push(format!("seed {seed}: Z = 0 with {switches} switches")),
            None => {}
            Some(z) => {
                let bound = 8.0 * eps * tr.pulls(z) as f64 / (1.0 - 8.0 * eps);
                worst_ratio = worst_ratio.max(switches / bound);
                if switches > bound {
                    failures.push(format!("seed {seed}: {switches} switches > {bound:.2}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "50 seeds (Z = 0/1/2: {:?}), max switches/bound {worst_ratio:.3}{}",
            z_counts,
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

/// Widths for all horizons up to `max`, enumerating every pair `(s, t)` with
/// `rho(s) <= t < s`, `rho(s) = s - lowest set bit of s`.
fn enumerate_widths(max: u64) -> Vec<u64> {
    let mut cut = vec![0u64; max as usize + 1];
    let mut widths = vec![0u64; max as usize + 1];
    let mut best = 0;
    for s in 1..=max {
        let rho = s & (s - 1);
        for t in rho.max(1)..s {
            cut[t as usize] += 1;
            best = best.max(cut[t as usize]);
        }
        widths[s as usize] = best;
    }
    widths
}

fn criterion_4() -> Outcome {
    let bound = |t: u64| 64 - t.leading_zeros() as u64; // floor(log2 t) + 1
    let exhaustive = enumerate_widths(1 << 20);
    let direct_ok = (1..=256u64).all(|horizon| {
        let direct = (1..=horizon)
            .map(|t| (1..=horizon).filter(|&s| (s & (s - 1)) <= t && t < s).count() as u64)
            .max()
            .unwrap();
        direct == exhaustive[horizon as usize]
    });
    let mut problems = Vec::new();
    for t in (1..=1u64 << 12).chain([1 << 16, 1 << 20]) {
        let e = exhaustive[t as usize];
        let w = width(&MultiScale, t);
        if e > bound(t) || w != e {
            problems.push(format!("T={t}: enumerated {e}, library {w}, bound {}", bound(t)));
        }
    }
    let (sigma, horizon, delta, walks) = (0.05, 1usize << 12, 0.1, 1000u64);
    let threshold = drift_threshold(sigma, horizon as u64, delta).unwrap();
    let exceed = (0..walks)
        .filter(|&seed| MultiScaleWalk::sample(sigma, horizon, 7_000 + seed).unwrap().max_abs() > threshold)
        .count();
    let fraction = exceed as f64 / walks as f64;
    outcome(
        direct_ok && problems.is_empty() && fraction <= delta + 0.03,
        format!(
            "width within bound and equal to enumeration for T <= 2^12, 2^16 (w={}), 2^20 (w={}); \
             enumerator checked against the definition for T <= 256: {direct_ok}; \
             drift exceedance {fraction:.3} <= 0.13{}",
            exhaustive[1 << 16],
            exhaustive[1 << 20],
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn criterion_5() -> Outcome {
    let means: Vec<f64> = (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect();
    let (mut combos, mut worst) = (0usize, f64::NEG_INFINITY);
    for &sigma in &[0.01, 0.02, 0.05, 0.1, 0.25, 0.5] {
        for &mp in &means {
            for &mq in &means {
                let p = CensoredGaussian::new(mp, sigma, 0.5, 1.0).unwrap();
                let q = CensoredGaussian::new(mq, sigma, 0.5, 1.0).unwrap();
                worst = worst.max(censored_kl(&p, &q).unwrap() - kl_upper_bound(mp, mq, sigma));
                combos += 1;
            }
        }
    }
    let mut wide = 0.0f64;
    for &(mp, mq, sigma) in &[(0.5, 0.52, 0.01), (0.0, 1.0, 1.0), (0.3, 0.25, 0.1), (0.75, 0.7, 0.05), (2.0, -1.0, 3.0)] {
        let lo = f64::min(mp, mq) - 10.0 * sigma;
        let hi = f64::max(mp, mq) + 10.0 * sigma;
        let p = CensoredGaussian::new(mp, sigma, lo, hi).unwrap();
        let q = CensoredGaussian::new(mq, sigma, lo, hi).unwrap();
        let closed = (mp - mq) * (mp - mq) / (2.0 * sigma * sigma);
        wide = wide.max((censored_kl(&p, &q).unwrap() - closed).abs());
    }
    outcome(
        combos >= 64 && worst <= 1e-9 && wide <= 1e-6,
        format!("{combos} pairs, max(censored - bound) = {worst:.2e}; wide-bound deviation {wide:.2e}"),
    )
}

fn criterion_6(wrapper_runs: &[&RunRecord]) -> Outcome {
    let failed: Vec<String> = wrapper_runs
        .iter()
        .filter(|r| !r.audit.as_ref().is_some_and(|a| a.passed()))
        .map(|r| format!("T={} seed={}", r.row.horizon, r.row.seed))
        .collect();
    let slack = wrapper_runs
        .iter()
        .filter_map(|r| r.audit.as_ref())
        .flat_map(|a| a.checks().map(|c| c.slack))
        .fold(f64::INFINITY, f64::min);
    outcome(
        !wrapper_runs.is_empty() && failed.is_empty(),
        format!(
            "{} wrapper runs audited, {} failed, smallest slack {slack:.3e}{}",
            wrapper_runs.len(),
            failed.len(),
            if failed.is_empty() { String::new() } else { format!(": {}", failed.join(", ")) }
        ),
    )
}

fn samples(records: &[RunRecord], pick: fn(&RunRecord) -> f64) -> Vec<Sample> {
    records
        .iter()
        .map(|r| Sample {
            horizon: r.row.horizon,
            seed: r.row.seed,
            value: pick(r),
        })
        .collect()
}

fn criterion_7(lower: &[RunRecord], thm1: &[RunRecord]) -> Outcome {
    let wrapped = analyze_samples(&samples(lower, |r| r.row.policy_regret), "policy_regret", 1000, 0).unwrap();
    let raw = analyze_samples(&samples(thm1, |r| r.row.pseudo_regret), "pseudo_regret", 1000, 0).unwrap();
    let ci = |a: &cadf_cli::Analysis| a.bootstrap.as_ref().map_or(String::new(), |b| format!(" [{:.3}, {:.3}]", b.alpha_low, b.alpha_high));
    outcome(
        (0.55..=0.80).contains(&wrapped.alpha) && raw.alpha >= 0.95,
        format!(
            "wrapper-EXP3 vs lower bound: alpha {:.4}{} (R^2 {:.3}), want [0.55, 0.80]; \
             raw EXP3 vs Theorem 1 pseudo regret: alpha {:.4}{}, want >= 0.95",
            wrapped.alpha,
            ci(&wrapped),
            wrapped.r_squared,
            raw.alpha,
            ci(&raw)
        ),
    )
}

fn criterion_8() -> (Outcome, Vec<RunRecord>) {
    let (horizon, arms) = (10_000, 3);
    let space = ActionSpace::discrete(arms).unwrap();
    let comparators = space.comparators();
    let mut identical = 0;
    let seeds = 20u64;
    for seed in 0..seeds {
        let loss = IidBernoulliLoss::spread(arms, seed).unwrap();
        let cfg = GameConfig::new(horizon, space.clone(), 1, 0, seed).unwrap();
        let mut raw = Exp3::new(arms, horizon, seed).unwrap();
        let a = run_game(&cfg, &mut raw, &loss, &mut NoDelay).unwrap();
        let mut wrapped = MiniBatch::new(Exp3::new(arms, horizon, seed).unwrap(), 1, horizon, Action::Arm(0));
        let b = run_game(&cfg, &mut wrapped, &loss, &mut NoDelay).unwrap();
        let same_weights = raw
            .probabilities()
            .iter()
            .zip(wrapped.inner().probabilities())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        let bits = |tr: &Transcript| tr.observed.iter().chain(&tr.true_losses).map(|v| v.to_bits()).collect::<Vec<_>>();
        let ra = policy_regret(&a, &loss, &comparators).unwrap();
        let rb = policy_regret(&b, &loss, &comparators).unwrap();
        if a.actions == b.actions && bits(&a) == bits(&b) && same_weights && ra == rb {
            identical += 1;
        }
    }
    // the same comparison through the experiment runner
    let mk = |learner: &str| {
        SpecOverrides {
            adversary: Some("iid".into()),
            learner: Some(learner.into()),
            delay: Some("none".into()),
            tau: Some(1),
            horizons: vec![2000, 5000],
            arms: Some(arms),
            seeds: Some(10),
            ..Default::default()
        }
        .resolve()
        .unwrap()
    };
    let wrapped = run_experiment(&mk("wrapper-exp3")).unwrap();
    let raw = run_experiment(&mk("exp3")).unwrap();
    let rows_match = wrapped.len() == raw.len()
        && wrapped.iter().zip(&raw).all(|(w, r)| {
            (w.row.seed, w.row.horizon, w.row.tau, w.row.switch_count) == (r.row.seed, r.row.horizon, r.row.tau, r.row.switch_count)
                && w.row.policy_regret.to_bits() == r.row.policy_regret.to_bits()
                && w.row.pseudo_regret.to_bits() == r.row.pseudo_regret.to_bits()
                && w.row.realized_total.to_bits() == r.row.realized_total.to_bits()
        });
    (
        outcome(
            identical == seeds as usize && rows_match,
            format!("{identical}/{seeds} trajectories and regrets bit-identical; runner rows identical: {rows_match}"),
        ),
        wrapped,
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "Theorem 1 replication", timed(Some(Duration::from_secs(10)), criterion_1)),
        (2, "indistinguishability", timed(None, criterion_2)),
        (3, "lower-bound adversary invariants", timed(Some(Duration::from_secs(30)), criterion_3)),
        (4, "walk certification", timed(None, criterion_4)),
        (5, "censored KL bound", timed(None, criterion_5)),
    ];

    let start = Instant::now();
    let lower = run_experiment(&spec("lowerbound", "wrapper-exp3", cadf_cli::default_grid(), 50)).unwrap();
    let thm1 = run_experiment(&spec("thm1", "exp3", cadf_cli::default_grid(), 50)).unwrap();
    let mut scaling = criterion_7(&lower, &thm1);
    let took = start.elapsed();
    scaling.detail = format!("{}; {:.1} s", scaling.detail, took.as_secs_f64());
    if took > Duration::from_secs(300) {
        scaling.passed = false;
        scaling.detail = format!("{} exceeds the 300 s limit", scaling.detail);
    }

    let (reduction, reduction_runs) = criterion_8();
    let wrapper_runs: Vec<&RunRecord> = lower.iter().chain(&reduction_runs).collect();
    results.push((6, "Theorem 2 term audit", timed(None, || criterion_6(&wrapper_runs))));
    results.push((7, "scaling recovery", scaling));
    results.push((8, "reduction sanity", reduction));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n} ({name}): {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.passed as usize;
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
