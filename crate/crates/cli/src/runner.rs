//! Executes experiment specs and serializes the results.

use std::io::Write;
use std::time::Instant;

use cadf_core::adversaries::{
    default_lb_params, ConstantLoss, DelayStateMachine, FullDelay, IidBernoulliLoss, LaggedMatchLoss,
    LowerBoundLoss, NoDelay, ParityDelay, QuadraticBallLoss, Theorem1Loss, UniformSpread,
};
use cadf_core::analysis::{verify_theorem2_terms, Theorem2Audit};
use cadf_core::learners::{choose_tau, choose_tau_bco, inner_rounds, Exp3, Fkm, MiniBatch, UniformRandom};
use cadf_core::seed::combine;
use cadf_core::{
    policy_regret, run_game, Action, ActionSpace, DelayAdversary, GameConfig, Learner, LossAdversary, Transcript,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::spec::{AdversaryKind, DelayKind, ExperimentSpec, LearnerKind};

/// Column order of the CSV output.
pub const COLUMNS: [&str; 13] = [
    "seed",
    "T",
    "K",
    "d",
    "m",
    "tau",
    "learner",
    "adversary",
    "policy_regret",
    "pseudo_regret",
    "realized_total",
    "switch_count",
    "wall_time_ms",
];

/// One CSV row: a single `(seed, T)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "K")]
    pub arms: usize,
    pub d: usize,
    pub m: usize,
    pub tau: usize,
    pub learner: String,
    pub adversary: String,
    pub policy_regret: f64,
    pub pseudo_regret: f64,
    pub realized_total: f64,
    /// Action switches of the learner.
    pub switch_count: usize,
    pub wall_time_ms: f64,
}

/// A row plus diagnostics that do not go into the CSV.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub row: ResultRow,
    pub run_index: usize,
    /// Present for wrapped learners.
    pub audit: Option<Theorem2Audit>,
    /// Switches of the delay adversary's state, when it has one.
    pub state_switches: usize,
    /// Best arm of the lower-bound or Theorem 1 adversary, if any.
    pub best_arm: Option<usize>,
}

/// `hash(seed_base, run_index)`; independent of the horizon and of the number of seeds.
pub fn run_seed(seed_base: u64, run_index: usize) -> u64 {
    combine(seed_base, run_index as u64)
}

/// Batch length used for `horizon` under `spec` (1 for unwrapped learners).
pub fn resolved_tau(spec: &ExperimentSpec, horizon: usize) -> usize {
    if !spec.learner.wrapped() {
        1
    } else if spec.tau > 0 {
        spec.tau
    } else if spec.learner == LearnerKind::WrapperFkm {
        choose_tau_bco(horizon, spec.arms, spec.delay_span, spec.memory)
    } else {
        choose_tau(horizon, spec.arms, spec.delay_span, spec.memory)
    }
}

/// Lattice points per axis for the quadratic adversary's comparators (about 1000 in total).
fn lattice_per_axis(dimension: usize) -> usize {
    (1000f64.powf(1.0 / dimension as f64).floor() as usize).clamp(3, 41)
}

fn action_space(spec: &ExperimentSpec) -> CliResult<ActionSpace> {
    Ok(if spec.adversary.continuous() {
        ActionSpace::ball_with_lattice(spec.arms, 1.0, lattice_per_axis(spec.arms))?
    } else {
        ActionSpace::discrete(spec.arms)?
    })
}

struct Environment {
    loss: Box<dyn LossAdversary>,
    delay: Box<dyn DelayAdversary>,
    best_arm: Option<usize>,
}

fn environment(spec: &ExperimentSpec, horizon: usize, seed: u64) -> CliResult<Environment> {
    let k = spec.arms;
    let mut best_arm = None;
    let mut machine = None;
    let loss: Box<dyn LossAdversary> = match spec.adversary {
        AdversaryKind::Thm1 => {
            let l = Theorem1Loss::sample(seed);
            best_arm = Some(l.best_arm());
            Box::new(l)
        }
        AdversaryKind::LowerBound => {
            let (eps0, sigma0) = default_lb_params(k, horizon)?;
            let eps = if spec.epsilon > 0.0 { spec.epsilon } else { eps0 };
            let sigma = if spec.sigma > 0.0 { spec.sigma } else { sigma0 };
            let l = LowerBoundLoss::sample(k, horizon, eps, sigma, seed)?;
            best_arm = l.best_arm();
            if spec.delay == DelayKind::StateMachine {
                machine = Some(DelayStateMachine::new(l.clone()));
            }
            Box::new(l)
        }
        AdversaryKind::Constant => Box::new(ConstantLoss::new(0.5)?),
        AdversaryKind::Iid => Box::new(IidBernoulliLoss::spread(k, seed)?),
        AdversaryKind::Lagged => Box::new(LaggedMatchLoss::new(spec.memory)?),
        AdversaryKind::Quadratic => {
            let c = 0.5 / (k as f64).sqrt();
            Box::new(QuadraticBallLoss::new(vec![c; k], 1.0)?)
        }
    };
    let d = spec.delay_span;
    let delay: Box<dyn DelayAdversary> = match spec.delay {
        DelayKind::None => Box::new(NoDelay),
        DelayKind::Parity => Box::new(ParityDelay),
        DelayKind::StateMachine => Box::new(machine.expect("validated: statemachine needs lowerbound")),
        DelayKind::Full => Box::new(FullDelay::new(d)?),
        DelayKind::Uniform => Box::new(UniformSpread::new(d)?),
    };
    Ok(Environment { loss, delay, best_arm })
}

fn learner(spec: &ExperimentSpec, space: &ActionSpace, horizon: usize, tau: usize, seed: u64) -> CliResult<Box<dyn Learner>> {
    let k = spec.arms;
    Ok(match spec.learner {
        LearnerKind::Uniform => Box::new(UniformRandom::new(space.clone(), seed)),
        LearnerKind::Exp3 => Box::new(Exp3::new(k, horizon, seed)?),
        LearnerKind::WrapperExp3 => {
            let inner = Exp3::new(k, inner_rounds(horizon, tau).max(1), seed)?;
            Box::new(MiniBatch::new(inner, tau, horizon, Action::Arm(0)))
        }
        LearnerKind::Fkm => Box::new(Fkm::with_schedule(k, 1.0, horizon, seed)?),
        LearnerKind::WrapperFkm => {
            let inner = Fkm::with_schedule(k, 1.0, inner_rounds(horizon, tau).max(1), seed)?;
            Box::new(MiniBatch::new(inner, tau, horizon, space.default_action()))
        }
    })
}

/// A finished game with what is needed to score it.
pub struct Played {
    pub transcript: Transcript,
    pub loss: Box<dyn LossAdversary>,
    pub space: ActionSpace,
    pub tau: usize,
    pub seed: u64,
    pub best_arm: Option<usize>,
}

/// Plays one `(horizon, run_index)` cell of the spec.
pub fn play(spec: &ExperimentSpec, horizon: usize, run_index: usize) -> CliResult<Played> {
    let seed = run_seed(spec.seed_base, run_index);
    let space = action_space(spec)?;
    let tau = resolved_tau(spec, horizon);
    let mut env = environment(spec, horizon, seed)?;
    let mut player = learner(spec, &space, horizon, tau, seed)?;
    let config = GameConfig::new(horizon, space.clone(), spec.delay_span, spec.memory, seed)?;
    let transcript = run_game(&config, player.as_mut(), env.loss.as_ref(), env.delay.as_mut())?;
    Ok(Played {
        transcript,
        loss: env.loss,
        space,
        tau,
        seed,
        best_arm: env.best_arm,
    })
}

/// Plays and scores one `(horizon, run_index)` cell.
pub fn run_one(spec: &ExperimentSpec, horizon: usize, run_index: usize) -> CliResult<RunRecord> {
    let start = Instant::now();
    let Played {
        transcript,
        loss,
        space,
        tau,
        seed,
        best_arm,
    } = play(spec, horizon, run_index)?;
    let report = policy_regret(&transcript, loss.as_ref(), &space.comparators())?;
    let audit = spec.learner.wrapped().then(|| verify_theorem2_terms(&transcript, tau));
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let row = ResultRow {
        seed,
        horizon,
        arms: spec.arms,
        d: spec.delay_span,
        m: spec.memory,
        tau,
        learner: spec.learner.to_string(),
        adversary: spec.adversary.to_string(),
        policy_regret: report.policy_regret,
        pseudo_regret: report.pseudo_regret,
        realized_total: report.realized_total,
        switch_count: transcript.action_switches(),
        wall_time_ms: (elapsed * 1e3).round() / 1e3,
    };
    if ![row.policy_regret, row.pseudo_regret, row.realized_total].iter().all(|v| v.is_finite()) {
        return Err(CliError::Input(format!("non-finite regret in run {run_index} at T = {horizon}")));
    }
    Ok(RunRecord {
        row,
        run_index,
        audit,
        state_switches: transcript.state_switches(),
        best_arm,
    })
}

/// Runs every `(T, seed)` cell on `spec.workers` threads. Records come back sorted
/// by `(T, seed)`, so the result does not depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> CliResult<Vec<RunRecord>> {
    let jobs: Vec<(usize, usize)> = spec
        .horizons
        .iter()
        .flat_map(|&t| (0..spec.seeds).map(move |i| (t, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", spec.workers)))?;
    let mut records = pool.install(|| {
        jobs.par_iter()
            .map(|&(t, i)| run_one(spec, t, i))
            .collect::<CliResult<Vec<_>>>()
    })?;
    records.sort_by_key(|r| (r.row.horizon, r.row.seed, r.run_index));
    Ok(records)
}

/// Header plus rows, UTF-8, LF line endings.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(out);
    w.write_record(COLUMNS).map_err(|e| CliError::io("csv", e))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::io("csv", e))?;
    }
    w.flush().map_err(|e| CliError::io("csv", e))
}

pub fn csv_string(rows: &[ResultRow]) -> CliResult<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::io("csv", e))
}
