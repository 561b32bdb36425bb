use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use vvbench_core::bench::{self, RunOptions};
use vvbench_core::selftest;

#[derive(Parser)]
#[command(name = "vvbench", version, about = "Spin-orbit beam bench simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bench script and write its report and output files.
    Simulate {
        script: PathBuf,
        /// Directory for images and trajectory tables.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Samples per element for trajectories without `samples=`.
        #[arg(long, default_value_t = bench::run::DEFAULT_SAMPLES_PER_ELEMENT as u64,
              value_parser = clap::value_parser!(u64).range(16..))]
        samples_per_element: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the built-in acceptance checks.
    Selftest,
}

fn simulate(
    script: PathBuf,
    out_dir: PathBuf,
    samples_per_element: usize,
    report: Option<PathBuf>,
) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&script)
        .with_context(|| format!("reading {}", script.display()))?;
    let parsed =
        bench::parse(&text).with_context(|| format!("parsing {}", script.display()))?;
    let outcome = bench::run(&parsed, &RunOptions { out_dir, samples_per_element })?;
    let json = outcome.report.to_json();
    match report {
        Some(path) => std::fs::write(&path, &json)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    for e in &outcome.report.errors {
        eprintln!("error: {e}");
    }
    Ok(if outcome.report.is_success() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Simulate { script, out_dir, samples_per_element, report } => {
            simulate(script, out_dir, samples_per_element as usize, report)
        }
        Command::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} passed, {failed} failed", results.len() - failed);
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
