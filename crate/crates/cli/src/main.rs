use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use perc_lab_cli::config::parse_seed;
use perc_lab_cli::{execute, write_outputs, Experiment, ExperimentConfig, RunError};

const INVALID: u8 = 1;
const CHECKS_FAILED: u8 = 2;

/// Run a percolation experiment described by a config file.
#[derive(Parser, Debug)]
#[command(name = "perc-lab", version)]
struct Cli {
    /// crossing, arm, f_j, nested, corr-length, theta, quasi-mult,
    /// exponent-fit, russo, scaling-report, revealment, pivotal or selftest.
    experiment: String,
    /// Experiment config; optional for `selftest`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (decimal or 0x-hex), overriding the config.
    #[arg(long, value_parser = seed_arg)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Output path prefix, overriding the config.
    #[arg(long)]
    out: Option<String>,
}

fn seed_arg(s: &str) -> Result<u64, String> {
    parse_seed(s).ok_or_else(|| format!("`{s}` is not a non-negative 64-bit integer"))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("perc-lab: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(INVALID);
        }
    };
    let Some(experiment) = Experiment::from_name(&cli.experiment) else {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        return fail(INVALID, format!("unknown experiment `{}`; expected one of {}", cli.experiment, names.join(", ")));
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(INVALID, format!("{}: {e}", path.display())),
            };
            match ExperimentConfig::parse(&text, Some(experiment)) {
                Ok(c) => c,
                Err(e) => return fail(INVALID, format!("{}: {e}", path.display())),
            }
        }
        None if experiment == Experiment::Selftest => ExperimentConfig::selftest(),
        None => return fail(INVALID, format!("`{experiment}` needs --config FILE")),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.output = Some(o);
    }
    let workers = match cli.workers {
        Some(0) => return fail(INVALID, "--workers must be at least 1"),
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let prefix = cfg.output.clone().unwrap_or_else(|| experiment.name().to_string());

    eprintln!("perc-lab: {experiment}, seed {}, {workers} worker(s)", cfg.seed);
    let start = Instant::now();
    let out = match execute(&cfg, workers, &mut |msg| eprintln!("perc-lab: {msg}")) {
        Ok(o) => o,
        Err(e @ RunError::Invalid(_)) | Err(e @ RunError::Failed(_)) => return fail(INVALID, e),
    };
    let wall = start.elapsed().as_secs_f64();
    let files = match write_outputs(&prefix, &cfg, &out, workers, wall) {
        Ok(f) => f,
        Err(e) => return fail(INVALID, format!("writing {prefix}.*: {e}")),
    };
    println!("experiment = {experiment}");
    println!("seed = {}", cfg.seed);
    for line in &out.summary {
        println!("{line}");
    }
    for f in &files {
        println!("file = {f}");
    }
    eprintln!("perc-lab: done in {wall:.2}s");
    if out.failed_checks {
        return fail(CHECKS_FAILED, "self-test failed");
    }
    ExitCode::SUCCESS
}
