//! Configuration, orchestration and file output for the `superfocus`
//! command-line tool. The binary is a thin wrapper over [`execute`].

use std::path::PathBuf;

pub mod config;
mod commands;
pub mod output;

pub use commands::{analyze_records, RunAnalysis, RunReport};
pub use config::RunConfig;

/// Subcommands of the tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    ScanTilt,
    ScanThickness,
    Analyze,
    Spin,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::ScanTilt => "scan-tilt",
            Command::ScanThickness => "scan-thickness",
            Command::Analyze => "analyze",
            Command::Spin => "spin",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Every violated constraint, one per entry.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{0}")]
    Runtime(String),

    #[error(transparent)]
    Core(#[from] superfocus_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(seed) = self.seed {
            config.beam.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output.directory = out.clone();
        }
        if let Some(input) = &self.input {
            config.analysis.input = Some(input.clone());
        }
    }
}

/// Validates `config` and runs `command`, on a dedicated pool of `threads`
/// workers when given. The worker count never changes the results.
pub fn execute(command: Command, config: &RunConfig, threads: Option<usize>) -> Result<RunReport, CliError> {
    let problems = config.violations(command);
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }
    if threads == Some(0) {
        return Err(CliError::Config(vec!["--threads must be at least 1".into()]));
    }
    let pool = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    let workers = pool.current_num_threads();
    pool.install(|| commands::run(command, config, workers))
}
