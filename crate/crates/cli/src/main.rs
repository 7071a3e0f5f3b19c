use std::path::{Path, PathBuf};
use std::process::ExitCode;

use auv_cli::{checks, emit_plot_script, parse_scenario, write_outputs, CliError, Format, Result, SweepEntry};
use auv_sim::{compute_metrics, hard_switch_baseline, run_scenario, SimLog};
use clap::{Parser, Subcommand};

/// Multiple-model fault-tolerant control simulator for an 8-thruster AUV.
///
/// Set AUV_FTC_LOG=info to get run summaries on stderr.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive controller on a scenario.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the adaptive controller and the hard-switching baseline at each interval.
    BaselineSweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Detection intervals in seconds.
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,5,10")]
        intervals: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the deterministic oracle checks.
    Verify,
}

fn verbose() -> bool {
    std::env::var("AUV_FTC_LOG").is_ok_and(|v| matches!(v.as_str(), "info" | "debug"))
}

fn emit(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

/// Writes the log and metrics, returning the paths written.
fn save(log: &SimLog, out: &Path, stem: &str, format: Format) -> Result<Vec<PathBuf>> {
    let metrics = compute_metrics(log);
    if verbose() {
        eprintln!("{stem}: {}", serde_json::to_string(&metrics).unwrap_or_default());
    }
    write_outputs(log, &metrics, out, stem, format)
}

/// A run that stopped early still leaves its partial log behind.
fn finish(result: auv_sim::Result<SimLog>, out: &Path, stem: &str, format: Format) -> Result<Vec<PathBuf>> {
    match result {
        Ok(log) => save(&log, out, stem, format),
        Err(e) => {
            if let Some(log) = e.partial_log() {
                emit(&save(log, out, stem, format)?);
            }
            Err(CliError::from(e))
        }
    }
}

fn run(scenario: &Path, out: &Path, seed: Option<u64>, format: Format) -> Result<()> {
    let mut s = parse_scenario(scenario)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let paths = finish(run_scenario(&s), out, "run", format)?;
    emit(&paths);
    if format == Format::Csv {
        emit(&[emit_plot_script(&paths[..1], out)?]);
    }
    Ok(())
}

fn sweep(scenario: &Path, intervals: &[f64], out: &Path, seed: Option<u64>) -> Result<()> {
    let mut s = parse_scenario(scenario)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    // each run is independent; fan them out and join in order
    let results: Vec<(String, Option<f64>, auv_sim::Result<SimLog>)> = std::thread::scope(|scope| {
        let s = &s;
        let soft = scope.spawn(move || run_scenario(s));
        let hard: Vec<_> = intervals.iter().map(|&h| (h, scope.spawn(move || hard_switch_baseline(s, h)))).collect();
        let mut v = vec![("soft".to_string(), None, soft.join().expect("simulation thread panicked"))];
        v.extend(
            hard.into_iter().map(|(h, j)| (format!("hard_{h}"), Some(h), j.join().expect("simulation thread panicked"))),
        );
        v
    });
    let mut logs = vec![];
    let mut summary = vec![];
    let mut first_err = None;
    for (stem, interval, result) in results {
        let (log, err) = match result {
            Ok(log) => (Some(log), None),
            Err(e) => (e.partial_log().cloned(), Some(e)),
        };
        if let Some(log) = &log {
            let paths = save(log, out, &stem, Format::Csv)?;
            emit(&paths);
            logs.push(paths[0].clone());
            let pulse_m = compute_metrics(log).fault_events.iter().map(|e| e.pulse_m).collect();
            summary.push(SweepEntry { label: stem, detection_interval_s: interval, pulse_m });
        }
        if first_err.is_none() {
            first_err = err;
        }
    }
    let summary_path = out.join("sweep.json");
    let text = serde_json::to_string_pretty(&summary).expect("plain data serializes");
    std::fs::write(&summary_path, text + "\n").map_err(|source| CliError::Io { path: summary_path.clone(), source })?;
    emit(&[summary_path]);
    if !logs.is_empty() {
        emit(&[emit_plot_script(&logs, out)?]);
    }
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, out, seed, format } => run(scenario, out, *seed, *format),
        Command::BaselineSweep { scenario, intervals, out, seed } => sweep(scenario, intervals, out, *seed),
        Command::Verify => {
            let results = checks::verify();
            for c in &results {
                println!("{c}");
            }
            return if results.iter().all(|c| c.pass) { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
