use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sound_ranging::error::Error;
use sound_ranging::harness::{read_config, run, selftest, RunRecord, Scenario};

const CONFIG_ERROR: u8 = 2;
const SOLVER_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "srp", version, about = "Locate a wave source from sensor arrival times")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by an INI file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Write one `iter ...` line per iteration here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the run record as JSON here.
        #[arg(long = "json-report")]
        json_report: Option<PathBuf>,
    },
    /// Run the 64-sensor ℓ_5.6789 plane scenario.
    DemoAppendix {
        #[arg(long, default_value_t = 1)]
        sensor_seed: u64,
        #[arg(long, default_value_t = 2)]
        source_seed: u64,
    },
    /// Run a quick sweep of solver invariants.
    Selftest,
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if matches!(e, Error::Config(_)) { CONFIG_ERROR } else { SOLVER_ERROR })
}

fn write(path: &Option<PathBuf>, body: impl FnOnce() -> String) -> Result<(), ExitCode> {
    if let Some(path) = path {
        std::fs::write(path, body()).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(SOLVER_ERROR)
        })?;
    }
    Ok(())
}

fn finish(rec: &RunRecord) -> ExitCode {
    print!("{}", rec.summary());
    if rec.success {
        ExitCode::SUCCESS
    } else {
        eprintln!("solver stopped without reaching precision: {}", rec.halt);
        ExitCode::from(SOLVER_ERROR)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Solve { config, trace, json_report } => {
            let sc = match read_config(&config) {
                Ok(sc) => sc,
                Err(e) => return exit_for(&e),
            };
            let rec = match run(&sc) {
                Ok(rec) => rec,
                Err(e) => return exit_for(&e),
            };
            if let Err(code) = write(&trace, || rec.trace_text()).and_then(|_| write(&json_report, || rec.to_json())) {
                return code;
            }
            finish(&rec)
        }
        Command::DemoAppendix { sensor_seed, source_seed } => match run(&Scenario::appendix(sensor_seed, source_seed)) {
            Ok(rec) => finish(&rec),
            Err(e) => exit_for(&e),
        },
        Command::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(SOLVER_ERROR)
            }
        }
    }
}
