use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use penalty_stab::exec::ExecMode;
use penalty_stab::harness::{exit_code, invoke, Command, EXIT_OK, EXIT_RUNTIME};

#[derive(Parser)]
#[command(name = "penalty-stab", version, about = "Penalized boundary feedback experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time histories of the state norms and the control.
    Simulate(Common),
    /// Spatial refinement study with a mesh-dependent penalty.
    Convergence(Common),
    /// Successive differences over a descending penalty list.
    EpsilonStudy(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Dotted-path edit applied before validation, e.g. `model.nu=0.2`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run rows one after another on the calling thread.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Convergence(a) => (Command::Convergence, a),
        Cmd::EpsilonStudy(a) => (Command::EpsilonStudy, a),
    };
    let exec = if args.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::default()
    };
    let code = match invoke(command, &args.config, &args.out, &args.overrides, exec) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            for fail in &outcome.failures {
                eprintln!("run failed: {fail}");
            }
            if outcome.failures.is_empty() {
                EXIT_OK
            } else {
                EXIT_RUNTIME
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
