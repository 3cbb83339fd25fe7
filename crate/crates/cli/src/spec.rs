//! Experiment specifications, the component registry and config-file handling.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

macro_rules! registry {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = CliError;

            fn from_str(s: &str) -> CliResult<Self> {
                Self::ALL.iter().copied().find(|k| k.name() == s).ok_or_else(|| {
                    let known: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                    CliError::Usage(format!(
                        "unknown {} `{s}` (known: {})",
                        stringify!($name).trim_end_matches("Kind").to_lowercase(),
                        known.join(", ")
                    ))
                })
            }
        }
    };
}

registry!(
    /// Loss adversaries.
    AdversaryKind {
        Thm1 => "thm1",
        LowerBound => "lowerbound",
        Constant => "constant",
        Iid => "iid",
        Lagged => "lagged",
        Quadratic => "quadratic",
    }
);

registry!(
    /// Delay adversaries.
    DelayKind {
        None => "none",
        Parity => "parity",
        StateMachine => "statemachine",
        Full => "full",
        Uniform => "uniform",
    }
);

registry!(
    /// Learners.
    LearnerKind {
        Uniform => "uniform",
        Exp3 => "exp3",
        WrapperExp3 => "wrapper-exp3",
        Fkm => "fkm",
        WrapperFkm => "wrapper-fkm",
    }
);

impl AdversaryKind {
    /// Whether the action space is the unit ball (`K` is then its dimension).
    pub fn continuous(self) -> bool {
        self == AdversaryKind::Quadratic
    }
}

impl LearnerKind {
    pub fn wrapped(self) -> bool {
        matches!(self, LearnerKind::WrapperExp3 | LearnerKind::WrapperFkm)
    }

    fn needs_continuous(self) -> Option<bool> {
        match self {
            LearnerKind::Uniform => None,
            LearnerKind::Exp3 | LearnerKind::WrapperExp3 => Some(false),
            LearnerKind::Fkm | LearnerKind::WrapperFkm => Some(true),
        }
    }
}

/// Horizons `2^10 ..= 2^16`, the default sweep grid.
pub fn default_grid() -> Vec<usize> {
    (10..=16).map(|k| 1usize << k).collect()
}

/// A fully resolved, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub adversary: AdversaryKind,
    pub delay: DelayKind,
    pub learner: LearnerKind,
    pub horizons: Vec<usize>,
    /// Arms, or the dimension for the quadratic adversary.
    pub arms: usize,
    pub delay_span: usize,
    pub memory: usize,
    /// Batch length; 0 picks it from the horizon.
    pub tau: usize,
    /// Lower-bound gap; 0 uses the default for `(K, T)`.
    pub epsilon: f64,
    /// Lower-bound walk scale; 0 uses the default for `(K, T)`.
    pub sigma: f64,
    pub seeds: usize,
    pub seed_base: u64,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

/// Raw settings from flags or a config file. Unset fields fall back to defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecOverrides {
    pub adversary: Option<String>,
    pub delay: Option<String>,
    pub learner: Option<String>,
    pub horizons: Vec<usize>,
    pub arms: Option<usize>,
    pub delay_span: Option<usize>,
    pub memory: Option<usize>,
    pub tau: Option<usize>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub seeds: Option<usize>,
    pub seed_base: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("bad value `{value}` for `{key}`: {e}")))
}

impl SpecOverrides {
    /// Parses flat `key = value` text. Keys mirror the long flags (`T`, `K`, `d`,
    /// `seed-base`, ...). `#` starts a comment. `T` takes a comma-separated list
    /// and may be repeated.
    pub fn from_config(text: &str) -> CliResult<Self> {
        let mut o = SpecOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "adversary" => o.adversary = Some(value.to_string()),
                "delay" => o.delay = Some(value.to_string()),
                "learner" => o.learner = Some(value.to_string()),
                "T" => {
                    for part in value.split(',').filter(|p| !p.trim().is_empty()) {
                        o.horizons.push(parse_value(key, part)?);
                    }
                }
                "K" => o.arms = Some(parse_value(key, value)?),
                "d" => o.delay_span = Some(parse_value(key, value)?),
                "m" => o.memory = Some(parse_value(key, value)?),
                "tau" => o.tau = Some(parse_value(key, value)?),
                "epsilon" => o.epsilon = Some(parse_value(key, value)?),
                "sigma" => o.sigma = Some(parse_value(key, value)?),
                "seeds" => o.seeds = Some(parse_value(key, value)?),
                "seed-base" | "seed_base" => o.seed_base = Some(parse_value(key, value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                "workers" => o.workers = Some(parse_value(key, value)?),
                other => {
                    return Err(CliError::Usage(format!(
                        "config line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    /// `self` wins wherever it is set; `T` lists are replaced, not merged.
    pub fn over(self, base: SpecOverrides) -> SpecOverrides {
        SpecOverrides {
            adversary: self.adversary.or(base.adversary),
            delay: self.delay.or(base.delay),
            learner: self.learner.or(base.learner),
            horizons: if self.horizons.is_empty() { base.horizons } else { self.horizons },
            arms: self.arms.or(base.arms),
            delay_span: self.delay_span.or(base.delay_span),
            memory: self.memory.or(base.memory),
            tau: self.tau.or(base.tau),
            epsilon: self.epsilon.or(base.epsilon),
            sigma: self.sigma.or(base.sigma),
            seeds: self.seeds.or(base.seeds),
            seed_base: self.seed_base.or(base.seed_base),
            out: self.out.or(base.out),
            workers: self.workers.or(base.workers),
        }
    }

    /// Resolves names and defaults and checks that the components fit together.
    pub fn resolve(self) -> CliResult<ExperimentSpec> {
        let adversary: AdversaryKind = self.adversary.as_deref().unwrap_or("lowerbound").parse()?;
        let learner: LearnerKind = self.learner.as_deref().unwrap_or("wrapper-exp3").parse()?;
        let delay: DelayKind = match self.delay.as_deref() {
            Some(name) => name.parse()?,
            None => match adversary {
                AdversaryKind::Thm1 => DelayKind::Parity,
                AdversaryKind::LowerBound => DelayKind::StateMachine,
                _ if self.delay_span.unwrap_or(1) > 1 => DelayKind::Full,
                _ => DelayKind::None,
            },
        };
        let usage = |msg: String| Err(CliError::Usage(msg));

        let delay_span = match (delay, self.delay_span) {
            (DelayKind::None, None | Some(1)) => 1,
            (DelayKind::Parity | DelayKind::StateMachine, None | Some(2)) => 2,
            (DelayKind::Full | DelayKind::Uniform, None) => 2,
            (DelayKind::Full | DelayKind::Uniform, Some(d)) if d >= 1 => d,
            (kind, Some(d)) => return usage(format!("delay `{kind}` does not support d = {d}")),
        };

        match (adversary, delay) {
            (AdversaryKind::LowerBound, DelayKind::StateMachine) => {}
            (_, DelayKind::StateMachine) => {
                return usage("delay `statemachine` requires the `lowerbound` adversary".into())
            }
            (AdversaryKind::Thm1, DelayKind::Parity) => {}
            (AdversaryKind::Thm1, other) => {
                return usage(format!("the `thm1` adversary requires delay `parity`, got `{other}`"))
            }
            _ => {}
        }

        let natural_memory = match adversary {
            AdversaryKind::Thm1 => 1,
            AdversaryKind::Lagged => self.memory.unwrap_or(1),
            _ => 0,
        };
        let memory = self.memory.unwrap_or(natural_memory);
        if memory < natural_memory {
            return usage(format!("adversary `{adversary}` has memory {natural_memory}, got m = {memory}"));
        }
        if adversary == AdversaryKind::Lagged && memory == 0 {
            return usage("the `lagged` adversary needs m >= 1 (m is its lag)".into());
        }

        let arms = self.arms.unwrap_or(2);
        if adversary.continuous() {
            if arms < 1 {
                return usage("the ball dimension K must be at least 1".into());
            }
        } else if arms < 2 {
            return usage(format!("K must be at least 2, got {arms}"));
        }
        if adversary == AdversaryKind::Thm1 && arms != 2 {
            return usage(format!("the `thm1` adversary has exactly 2 arms, got K = {arms}"));
        }
        if let Some(wants) = learner.needs_continuous() {
            if wants != adversary.continuous() {
                return usage(format!("learner `{learner}` cannot play against adversary `{adversary}`"));
            }
        }

        let tau = self.tau.unwrap_or(0);
        if !learner.wrapped() && tau > 1 {
            return usage(format!("learner `{learner}` is unwrapped; tau must be 0 or 1"));
        }
        let epsilon = self.epsilon.unwrap_or(0.0);
        let sigma = self.sigma.unwrap_or(0.0);
        if adversary != AdversaryKind::LowerBound && (epsilon != 0.0 || sigma != 0.0) {
            return usage("epsilon and sigma apply only to the `lowerbound` adversary".into());
        }
        if !(epsilon >= 0.0) || !(sigma >= 0.0) {
            return usage("epsilon and sigma must be non-negative".into());
        }

        let horizons = self.horizons;
        if horizons.is_empty() {
            return usage("no horizons given (use --T)".into());
        }
        if horizons[0] == 0 || horizons.windows(2).any(|w| w[1] <= w[0]) {
            return usage(format!("horizons must be positive and strictly increasing: {horizons:?}"));
        }
        let seeds = self.seeds.unwrap_or(1);
        if seeds == 0 {
            return usage("seeds must be at least 1".into());
        }
        let workers = match self.workers {
            Some(0) => return usage("workers must be at least 1".into()),
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };

        Ok(ExperimentSpec {
            adversary,
            delay,
            learner,
            horizons,
            arms,
            delay_span,
            memory,
            tau,
            epsilon,
            sigma,
            seeds,
            seed_base: self.seed_base.unwrap_or(0),
            out: self.out,
            workers,
        })
    }
}
