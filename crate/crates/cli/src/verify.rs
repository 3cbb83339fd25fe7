//! Property suites behind `cadf verify <suite>`.
//!
//! Default sizes:
//! - `splits`: every registered adversary/delay pairing, 10 seeds at T = 2000.
//! - `thm1`: 100 uniform-random policies at T = 10^4 for both best arms, and
//!   every deterministic lookup-table learner for T <= 10.
//! - `lowerbound`: 20 seeds at T = 2^14, K = 2, default (epsilon, sigma).
//! - `walk`: width for every power of two from 2^4 to 2^16 by pair enumeration;
//!   drift over 1000 walks at T = 2^12, sigma = 0.05, delta = 0.1.
//! - `kl`: 196 censored-Gaussian pairs on [1/2, 1], plus wide-bound cases.
//! - `wrapper`: EXP3 under the mini-batch wrapper, 5 seeds at T = 3000 for
//!   d in {1, 2, 4} and three batch lengths.

use cadf_core::adversaries::state_machine::CARRY_CEILING;
use cadf_core::adversaries::{
    default_lb_params, drift_threshold, parent, switch_bound, trunc_half_one, width, width_bound, DelayStateMachine,
    FullDelay, IidBernoulliLoss, LowerBoundLoss, MultiScaleWalk, NoDelay, ParityDelay, Theorem1Loss,
};
use cadf_core::adversaries::walk::MultiScale;
use cadf_core::analysis::{censored_kl, kl_upper_bound, verify_theorem2_terms, CensoredGaussian};
use cadf_core::feedback::SPLIT_TOLERANCE;
use cadf_core::learners::{choose_tau, inner_rounds, Exp3, LookupTableLearner, MiniBatch, UniformRandom};
use cadf_core::{
    policy_regret, run_game, Action, ActionSpace, DelayAdversary, GameConfig, Learner, LossState, Transcript,
};

use crate::error::{CliError, CliResult};
use crate::runner::play;
use crate::spec::{AdversaryKind, DelayKind, LearnerKind, SpecOverrides};

pub const SUITES: [&str; 6] = ["splits", "thm1", "lowerbound", "walk", "kl", "wrapper"];

/// One invariant of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

pub fn run_suite(name: &str) -> CliResult<Vec<Check>> {
    match name {
        "splits" => splits(),
        "thm1" => thm1(),
        "lowerbound" => lowerbound(),
        "walk" => Ok(walk()),
        "kl" => kl(),
        "wrapper" => wrapper(),
        other => Err(CliError::Usage(format!(
            "unknown suite `{other}` (known: {})",
            SUITES.join(", ")
        ))),
    }
}

/// Split validity, aggregation and replay checks for one transcript. Returns the
/// first problem found.
pub fn split_problems(tr: &Transcript) -> Option<String> {
    let d = tr.config.delay_span;
    for (i, s) in tr.splits.iter().enumerate() {
        let t = i + 1;
        if s.components.len() != d {
            return Some(format!("t={t}: {} components, d = {d}", s.components.len()));
        }
        if s.components.iter().any(|&c| c < -SPLIT_TOLERANCE) {
            return Some(format!("t={t}: negative component"));
        }
        let sum: f64 = s.components.iter().sum();
        if (sum - tr.true_losses[i]).abs() > SPLIT_TOLERANCE {
            return Some(format!("t={t}: components sum to {sum}, loss {}", tr.true_losses[i]));
        }
    }
    for t in 1..=tr.horizon() {
        let due: f64 = (0..d.min(t)).map(|k| tr.splits[t - 1 - k].components[k]).sum();
        if (due - tr.observed[t - 1]).abs() > 1e-12 {
            return Some(format!("t={t}: observed {} but {due} was due", tr.observed[t - 1]));
        }
    }
    let horizon = tr.horizon();
    // components due after the horizon are never observed
    let pending: f64 = (1..=horizon)
        .flat_map(|s| (horizon - s + 1..d).map(move |k| tr.splits[s - 1].components[k]))
        .sum();
    let gap = tr.realized_total() - tr.observed_total() - pending;
    if gap.abs() > 1e-9 {
        return Some(format!("mass not conserved: gap {gap}"));
    }
    None
}

fn splits() -> CliResult<Vec<Check>> {
    let mut pairs = vec![
        (AdversaryKind::Thm1, DelayKind::Parity, 2),
        (AdversaryKind::LowerBound, DelayKind::StateMachine, 2),
    ];
    for adv in [AdversaryKind::LowerBound, AdversaryKind::Constant, AdversaryKind::Iid, AdversaryKind::Lagged, AdversaryKind::Quadratic] {
        pairs.push((adv, DelayKind::None, 1));
        pairs.push((adv, DelayKind::Full, 3));
        pairs.push((adv, DelayKind::Uniform, 3));
    }
    let mut checks = Vec::new();
    for (adv, delay, d) in pairs {
        let spec = SpecOverrides {
            adversary: Some(adv.to_string()),
            delay: Some(delay.to_string()),
            learner: Some(LearnerKind::Uniform.to_string()),
            delay_span: Some(d),
            horizons: vec![2000],
            seeds: Some(10),
            ..Default::default()
        }
        .resolve()?;
        let mut problem = None;
        for i in 0..spec.seeds {
            let p = play(&spec, 2000, i)?;
            if let Some(msg) = split_problems(&p.transcript) {
                problem = Some(format!("run {i}: {msg}"));
                break;
            }
            if let Err(e) = policy_regret(&p.transcript, p.loss.as_ref(), &p.space.comparators()) {
                problem = Some(format!("run {i}: {e}"));
                break;
            }
        }
        checks.push(Check::new(
            format!("{adv}/{delay} d={d}"),
            problem.is_none(),
            problem.unwrap_or_else(|| "10 runs: splits valid, aggregation exact, replay bit-exact".into()),
        ));
    }
    Ok(checks)
}

fn alternating(horizon: usize) -> Vec<f64> {
    (1..=horizon).map(|t| if t % 2 == 1 { 0.0 } else { 1.0 }).collect()
}

fn thm1_game(learner: &mut dyn Learner, z: usize, horizon: usize) -> CliResult<Transcript> {
    let cfg = GameConfig::new(horizon, ActionSpace::discrete(2)?, 2, 1, 0)?;
    Ok(run_game(&cfg, learner, &Theorem1Loss::new(z)?, &mut ParityDelay)?)
}

fn thm1() -> CliResult<Vec<Check>> {
    let horizon = 10_000;
    let expected = alternating(horizon);
    let arms = [Action::Arm(0), Action::Arm(1)];
    let (mut same, mut zero_policy, mut mistakes_match) = (true, true, true);
    for z in 0..2 {
        for seed in 0..100u64 {
            let mut learner = UniformRandom::new(ActionSpace::discrete(2)?, seed);
            let tr = thm1_game(&mut learner, z, horizon)?;
            same &= tr.observed == expected;
            let report = policy_regret(&tr, &Theorem1Loss::new(z)?, &arms)?;
            zero_policy &= report.policy_regret == 0.0;
            let mistakes = (0..horizon).step_by(2).filter(|&i| tr.actions[i].arm() != Some(z)).count();
            mistakes_match &= report.pseudo_regret == mistakes as f64;
        }
    }
    let mut exhaustive = true;
    let mut tables = 0usize;
    for t in 1..=10 {
        let expected = alternating(t);
        for code in 0..(1u32 << t) {
            for default in 0..2 {
                for z in 0..2 {
                    let mut learner = LookupTableLearner::new(default);
                    for r in 0..t {
                        learner.insert(&expected[..r], ((code >> r) & 1) as usize);
                    }
                    exhaustive &= thm1_game(&mut learner, z, t)?.observed == expected;
                    tables += 1;
                }
            }
        }
    }
    Ok(vec![
        Check::new("observations alternate", same, "100 uniform policies x 2 best arms, T = 10^4"),
        Check::new("policy regret is zero", zero_policy, "same runs, even T"),
        Check::new("pseudo regret counts odd-round mistakes", mistakes_match, "same runs"),
        Check::new("lookup tables see 0,1,0,1", exhaustive, format!("{tables} games, T <= 10")),
    ])
}

/// Per-round lower-bound invariants for one run. Returns the first violation.
pub fn lower_bound_problems(loss: &LowerBoundLoss, tr: &Transcript) -> (Option<String>, Option<String>, Option<String>) {
    let eps = loss.epsilon();
    let (mut carry_bad, mut obs_bad) = (None, None);
    for t in 1..=tr.horizon() {
        let diag = tr.diagnostics[t - 1];
        let carry = diag.carry_in.unwrap_or(f64::NAN);
        if carry_bad.is_none() && !(0.0..=CARRY_CEILING).contains(&carry) {
            carry_bad = Some(format!("t={t}: carry {carry}"));
        }
        let low = if diag.state == Some(LossState::LowLoss) { eps } else { 0.0 };
        let expected = trunc_half_one(loss.walk().value(t) + 0.75 - low);
        if obs_bad.is_none() && (tr.observed[t - 1] - expected).abs() > 1e-12 {
            obs_bad = Some(format!("t={t}: observed {} expected {expected}", tr.observed[t - 1]));
        }
    }
    let switches = tr.state_switches();
    let switch_bad = match loss.best_arm() {
        None if switches != 0 => Some(format!("Z = 0 but {switches} state switches")),
        None => None,
        Some(z) => {
            let bound = switch_bound(eps, tr.pulls(z)).unwrap_or(f64::NAN);
            (switches as f64 > bound).then(|| format!("{switches} switches > bound {bound:.3}"))
        }
    };
    (carry_bad, obs_bad, switch_bad)
}

fn lowerbound() -> CliResult<Vec<Check>> {
    let horizon = 1 << 14;
    let (eps, sigma) = default_lb_params(2, horizon)?;
    let mut found: [Option<String>; 4] = Default::default();
    for seed in 0..20u64 {
        let loss = LowerBoundLoss::sample(2, horizon, eps, sigma, seed)?;
        let cfg = GameConfig::new(horizon, ActionSpace::discrete(2)?, 2, 0, seed)?;
        let mut learner = UniformRandom::new(ActionSpace::discrete(2)?, seed);
        let tr = run_game(&cfg, &mut learner, &loss, &mut DelayStateMachine::new(loss.clone()))?;
        let (c, o, s) = lower_bound_problems(&loss, &tr);
        for (slot, p) in found.iter_mut().zip([c, o, s, split_problems(&tr)]) {
            if slot.is_none() {
                *slot = p.map(|m| format!("seed {seed}: {m}"));
            }
        }
    }
    let names = ["carry in [0, 1/4]", "observed loss formula", "state switch bound", "splits valid"];
    Ok(names
        .iter()
        .zip(found)
        .map(|(n, p)| Check::new(*n, p.is_none(), p.unwrap_or_else(|| "20 seeds, T = 2^14".into())))
        .collect())
}

/// Width for every horizon `1..=max`, by enumerating the pairs `(s, t)` with
/// `parent(s) <= t < s` as `s` grows. Independent of the library's difference array.
pub fn enumerated_widths(max: u64) -> Vec<u64> {
    let mut cut = vec![0u64; max as usize + 1];
    let mut widths = vec![0u64; max as usize + 1];
    let mut best = 0;
    for s in 1..=max {
        for t in parent(s).max(1)..s {
            cut[t as usize] += 1;
            best = best.max(cut[t as usize]);
        }
        widths[s as usize] = best;
    }
    widths
}

fn walk() -> Vec<Check> {
    let enumerated = enumerated_widths(1 << 16);
    let mut problem = None;
    for k in 4..=16 {
        let t = 1u64 << k;
        let w = width(&MultiScale, t);
        if w != enumerated[t as usize] || w > width_bound(t) {
            problem.get_or_insert(format!("T=2^{k}: width {w}, enumerated {}, bound {}", enumerated[t as usize], width_bound(t)));
        }
    }
    let (sigma, horizon, delta, walks) = (0.05, 1usize << 12, 0.1, 1000u64);
    let threshold = drift_threshold(sigma, horizon as u64, delta).unwrap_or(f64::NAN);
    let exceed = (0..walks)
        .filter(|&seed| MultiScaleWalk::sample(sigma, horizon, seed).map_or(true, |w| w.max_abs() > threshold))
        .count();
    let fraction = exceed as f64 / walks as f64;
    vec![
        Check::new(
            "width <= floor(log2 T) + 1",
            problem.is_none(),
            problem.unwrap_or_else(|| "T = 2^4 .. 2^16, matches pair enumeration".into()),
        ),
        Check::new(
            "drift exceedance",
            fraction <= delta + 0.03,
            format!("{exceed}/{walks} walks above {threshold:.4} (allowed {:.2})", delta + 0.03),
        ),
    ]
}

fn kl() -> CliResult<Vec<Check>> {
    let means: Vec<f64> = (0..7).map(|i| 0.6 + 0.05 * i as f64).collect();
    let (mut combos, mut worst, mut nonneg) = (0, f64::NEG_INFINITY, true);
    for &sigma in &[0.01, 0.05, 0.1, 0.5] {
        for &mp in &means {
            for &mq in &means {
                let p = CensoredGaussian::new(mp, sigma, 0.5, 1.0)?;
                let q = CensoredGaussian::new(mq, sigma, 0.5, 1.0)?;
                let kl = censored_kl(&p, &q)?;
                nonneg &= kl >= -1e-12;
                worst = worst.max(kl - kl_upper_bound(mp, mq, sigma));
                combos += 1;
            }
        }
    }
    let mut wide = 0.0f64;
    for &(mp, mq, sigma) in &[(0.5, 0.52, 0.01), (0.0, 1.0, 1.0), (0.3, 0.25, 0.1)] {
        let lo = f64::min(mp, mq) - 10.0 * sigma;
        let hi = f64::max(mp, mq) + 10.0 * sigma;
        let kl = censored_kl(&CensoredGaussian::new(mp, sigma, lo, hi)?, &CensoredGaussian::new(mq, sigma, lo, hi)?)?;
        wide = wide.max((kl - (mp - mq) * (mp - mq) / (2.0 * sigma * sigma)).abs());
    }
    Ok(vec![
        Check::new("censored KL <= Gaussian KL", worst <= 1e-9, format!("{combos} pairs, max excess {worst:.3e}")),
        Check::new("censored KL >= 0", nonneg, format!("{combos} pairs")),
        Check::new("wide bounds match closed form", wide < 1e-6, format!("max deviation {wide:.3e}")),
    ])
}

fn wrapped_game(horizon: usize, tau: usize, d: usize, seed: u64) -> CliResult<(Transcript, Vec<f64>)> {
    let loss = IidBernoulliLoss::spread(3, seed)?;
    let cfg = GameConfig::new(horizon, ActionSpace::discrete(3)?, d, 0, seed)?;
    let inner = Exp3::new(3, inner_rounds(horizon, tau).max(1), seed)?;
    let mut w = MiniBatch::new(inner, tau, horizon, Action::Arm(0));
    let mut delay: Box<dyn DelayAdversary> = if d == 1 { Box::new(NoDelay) } else { Box::new(FullDelay::new(d)?) };
    let tr = run_game(&cfg, &mut w, &loss, delay.as_mut())?;
    Ok((tr, w.feedback_log().to_vec()))
}

fn wrapper() -> CliResult<Vec<Check>> {
    let horizon = 3000;
    let (mut audit_ok, mut switches_ok, mut feedback_ok, mut runs) = (true, true, true, 0);
    for d in [1, 2, 4] {
        for tau in [1, 3, choose_tau(horizon, 3, d, 0)] {
            for seed in 0..5u64 {
                let (tr, fed) = wrapped_game(horizon, tau, d, seed)?;
                audit_ok &= verify_theorem2_terms(&tr, tau).passed();
                switches_ok &= tr.action_switches() < horizon.div_ceil(tau);
                switches_ok &= (2..=horizon).all(|t| tr.actions[t - 1] == tr.actions[t - 2] || (t - 1) % tau == 0);
                feedback_ok &= fed.len() == horizon / tau && fed.iter().all(|f| (0.0..=1.0).contains(f));
                runs += 1;
            }
        }
    }
    let mut identical = true;
    for seed in 0..5u64 {
        let loss = IidBernoulliLoss::spread(3, seed)?;
        let cfg = GameConfig::new(horizon, ActionSpace::discrete(3)?, 1, 0, seed)?;
        let mut raw = Exp3::new(3, horizon, seed)?;
        let a = run_game(&cfg, &mut raw, &loss, &mut NoDelay)?;
        let mut w = MiniBatch::new(Exp3::new(3, horizon, seed)?, 1, horizon, Action::Arm(0));
        let b = run_game(&cfg, &mut w, &loss, &mut NoDelay)?;
        identical &= a == b && w.inner().probabilities() == raw.probabilities();
    }
    Ok(vec![
        Check::new("Theorem 2 audit terms", audit_ok, format!("{runs} runs")),
        Check::new("switches only at batch starts", switches_ok, format!("{runs} runs")),
        Check::new("inner feedback in [0, 1]", feedback_ok, format!("{runs} runs")),
        Check::new("tau = 1 reproduces EXP3", identical, "5 seeds, d = 1"),
    ])
}
