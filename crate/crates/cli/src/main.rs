//! `dissipgap`: runs perturbation scenarios and writes JSON reports and CSV curves.

mod config;
mod error;
mod report;
mod run;
mod scenarios;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::ScenarioError;
use crate::report::RunReport;

#[derive(Parser)]
#[command(name = "dissipgap", version, about = "Perturbation scenarios for dissipative semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config and write report.json plus CSV files.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every scenario listed in a manifest and write summary.json.
    Suite {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one curve of a report as two-column CSV.
    EmitCurve {
        report: PathBuf,
        name: String,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), ScenarioError> {
    let Ok(raw) = std::env::var("DISSIPGAP_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ScenarioError::config(format!("DISSIPGAP_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ScenarioError::config(format!("thread pool: {e}")))
}

fn execute(command: Command) -> Result<i32, ScenarioError> {
    configure_threads()?;
    match command {
        Command::Run { config, out } => {
            let report = run::run(&config, &out)?;
            for c in &report.checks {
                println!(
                    "{} {}: {} (measured {}, bound {}, tolerance {})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.relation,
                    c.measured.0,
                    c.bound.0,
                    c.tolerance.0
                );
            }
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
            println!("{}: {}", report.scenario, if report.passed { "passed" } else { "failed" });
            Ok(run::exit_code(&report))
        }
        Command::Suite { manifest, out } => {
            let summary = suite::suite(&manifest, &out)?;
            for e in &summary.results {
                let status = if e.passed { "PASS" } else { "FAIL" };
                match &e.error {
                    Some(err) => println!("{status} {}: {err}", e.id),
                    None => println!("{status} {}: {}/{} checks", e.id, e.checks_passed, e.checks_total),
                }
            }
            println!("suite: {} scenarios, {} passed, {} failed", summary.scenarios, summary.passed, summary.failed);
            Ok(summary.exit_code())
        }
        Command::EmitCurve { report, name, out } => {
            let report = RunReport::load(&report)?;
            let csv = report.curve(&name)?.to_csv();
            match out {
                Some(path) => report::write_file(&path, &csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
