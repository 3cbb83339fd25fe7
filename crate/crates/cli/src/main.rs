use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cadf_cli::{cmd_analyze, cmd_run, cmd_verify, default_grid, CliError, CliResult, SpecOverrides};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cadf", version, about = "Bandits with composite anonymous delayed feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment; one CSV row per (seed, T).
    Run(RunArgs),
    /// Like `run`, defaulting to T = 2^10..2^16 and 50 seeds.
    Sweep(RunArgs),
    /// Run a property suite: splits, thm1, lowerbound, walk, kl, wrapper or all.
    Verify { suite: String },
    /// Fit mean regret ~ C T^alpha from a result CSV and print JSON.
    Analyze {
        csv: PathBuf,
        /// Column to average per horizon.
        #[arg(long, default_value = "policy_regret")]
        metric: String,
        /// Seed-bootstrap replicates (0 disables).
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
        #[arg(long = "seed-base", default_value_t = 0)]
        seed_base: u64,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    delay: Option<String>,
    #[arg(long)]
    learner: Option<String>,
    /// Horizon; repeat for several.
    #[arg(long = "T")]
    horizons: Vec<usize>,
    /// Arms (ball dimension for `quadratic`).
    #[arg(long = "K")]
    arms: Option<usize>,
    #[arg(long = "d")]
    delay_span: Option<usize>,
    #[arg(long = "m")]
    memory: Option<usize>,
    /// Batch length, 0 = automatic.
    #[arg(long)]
    tau: Option<usize>,
    /// Lower-bound gap, 0 = automatic.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Lower-bound walk scale, 0 = automatic.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long = "seed-base")]
    seed_base: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(self, defaults: SpecOverrides) -> CliResult<SpecOverrides> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                SpecOverrides::from_config(&text)?
            }
            None => SpecOverrides::default(),
        };
        let flags = SpecOverrides {
            adversary: self.adversary,
            delay: self.delay,
            learner: self.learner,
            horizons: self.horizons,
            arms: self.arms,
            delay_span: self.delay_span,
            memory: self.memory,
            tau: self.tau,
            epsilon: self.epsilon,
            sigma: self.sigma,
            seeds: self.seeds,
            seed_base: self.seed_base,
            out: self.out,
            workers: self.workers,
        };
        Ok(flags.over(file).over(defaults))
    }
}

fn execute(command: Command) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Run(args) => {
            let spec = args.overrides(SpecOverrides::default())?.resolve()?;
            cmd_run(&spec, &mut stdout)?;
        }
        Command::Sweep(args) => {
            let defaults = SpecOverrides {
                horizons: default_grid(),
                seeds: Some(50),
                ..Default::default()
            };
            let spec = args.overrides(defaults)?.resolve()?;
            cmd_run(&spec, &mut stdout)?;
        }
        Command::Verify { suite } => cmd_verify(&suite, &mut stdout)?,
        Command::Analyze {
            csv,
            metric,
            bootstrap,
            seed_base,
            out,
        } => {
            let analysis = cmd_analyze(&csv, &metric, bootstrap, seed_base)?;
            let json = serde_json::to_string_pretty(&analysis).map_err(|e| CliError::Io(e.to_string()))?;
            match out {
                Some(path) => std::fs::write(&path, json + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
                None => writeln!(stdout, "{json}").map_err(|e| CliError::Io(e.to_string()))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cadf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
