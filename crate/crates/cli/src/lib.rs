//! Experiment runner for the `cadf` simulation framework: component registry,
//! seeded sweeps, CSV and JSON output, verification suites and scaling fits.

pub mod analyze;
pub mod error;
pub mod runner;
pub mod spec;
pub mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub use analyze::{analyze_samples, read_samples, Analysis, Bootstrap, Sample};
pub use error::{CliError, CliResult};
pub use runner::{csv_string, run_experiment, run_one, write_csv, ResultRow, RunRecord, COLUMNS};
pub use spec::{default_grid, AdversaryKind, DelayKind, ExperimentSpec, LearnerKind, SpecOverrides};
pub use verify::{run_suite, Check, SUITES};

/// Runs the experiment and writes the CSV to `spec.out`, or to `stdout` when unset.
pub fn cmd_run(spec: &ExperimentSpec, stdout: &mut dyn Write) -> CliResult<Vec<ResultRow>> {
    let rows: Vec<ResultRow> = run_experiment(spec)?.into_iter().map(|r| r.row).collect();
    match &spec.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path.display(), e))?;
            write_csv(&rows, BufWriter::new(file))?;
        }
        None => write_csv(&rows, &mut *stdout)?,
    }
    Ok(rows)
}

/// Runs one suite (or `all`), printing a line per invariant.
pub fn cmd_verify(suite: &str, stdout: &mut dyn Write) -> CliResult<()> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut failed = Vec::new();
    for name in names {
        for check in run_suite(name)? {
            writeln!(stdout, "[{name}] {check}").map_err(|e| CliError::io("stdout", e))?;
            if !check.passed {
                failed.push(format!("{name}: {}", check.name));
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

/// Fits the per-horizon mean of `metric` in a result CSV.
pub fn cmd_analyze(csv_path: &Path, metric: &str, replicates: usize, seed: u64) -> CliResult<Analysis> {
    let file = File::open(csv_path).map_err(|e| CliError::io(csv_path.display(), e))?;
    let samples = read_samples(file, metric)?;
    analyze_samples(&samples, metric, replicates, seed)
}
