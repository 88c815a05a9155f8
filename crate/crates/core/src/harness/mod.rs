//! Command-line front end: configs in, CSV and SVG out.

pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;

use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::ExecMode;

pub use config::ExperimentConfig;
pub use experiments::{run_experiment, RunOutcome};

/// Subcommands and the experiment kind each one accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Convergence,
    EpsilonStudy,
}

impl Command {
    pub fn expected_kind(self) -> &'static str {
        match self {
            Command::Simulate => "decay",
            Command::Convergence => "convergence",
            Command::EpsilonStudy => "epsilon_study",
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// 1 for anything rejected before a run starts, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. }
        | Error::ParameterDomain { .. }
        | Error::NoAdmissibleRate(_)
        | Error::Inadmissible(_)
        | Error::InvalidMesh(_)
        | Error::NonNested(_)
        | Error::TooFewSamples(_) => EXIT_VALIDATION,
        Error::DimensionMismatch { .. }
        | Error::SingularCore { .. }
        | Error::SingularUpdate { .. }
        | Error::NewtonDiverged { .. }
        | Error::Io { .. } => EXIT_RUNTIME,
    }
}

/// Loads, validates and runs one invocation.
pub fn invoke(
    command: Command,
    config: &Path,
    out: &Path,
    overrides: &[String],
    exec: ExecMode,
) -> Result<RunOutcome> {
    let cfg = ExperimentConfig::load(config, overrides)?;
    let kind = cfg.experiment.kind();
    if kind != command.expected_kind() {
        return Err(Error::config(
            "experiment.kind",
            format!("`{kind}` cannot be run by this subcommand (expected `{}`)", command.expected_kind()),
        ));
    }
    run_experiment(&cfg, out, exec)
}
