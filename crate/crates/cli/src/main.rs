use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use superfocus_cli::{execute, Command, Overrides, RunConfig};

/// Monte Carlo simulation of MeV proton channeling in thin <100> Si.
#[derive(Parser)]
#[command(name = "superfocus", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    /// Overrides beam.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Run one ensemble and write records and analyses.
    Simulate(Common),
    /// Repeat the run for every tilt in scan.tilts.
    ScanTilt(Common),
    /// Snapshot one run at every thickness in the scan list.
    ScanThickness(Common),
    /// Re-analyse an existing record dump.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Overrides analysis.input.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Level diagram of the two-spin model.
    Spin(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, input) = match cli.command {
        Sub::Simulate(c) => (Command::Simulate, c, None),
        Sub::ScanTilt(c) => (Command::ScanTilt, c, None),
        Sub::ScanThickness(c) => (Command::ScanThickness, c, None),
        Sub::Analyze { common, input } => (Command::Analyze, common, input),
        Sub::Spin(c) => (Command::Spin, c, None),
    };
    let overrides = Overrides { seed: common.seed, threads: common.threads, out: common.out, input };
    let result = RunConfig::load(&common.config).and_then(|mut config| {
        overrides.apply(&mut config);
        execute(command, &config, overrides.threads)
    });
    match result {
        Ok(report) => {
            println!(
                "{}: {} protons, {} channeled, {} dechanneled, {} artifacts in {}",
                command.name(),
                report.protons,
                report.channeled,
                report.dechanneled,
                report.artifacts.len() + 1,
                report.out_dir.display()
            );
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &report.failures {
                    eprintln!("failed: {f}");
                }
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
