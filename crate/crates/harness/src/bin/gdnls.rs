use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gdnls_harness::{execute, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Simulate,
    Converge,
    ThresholdScan,
    NormProbe,
    ChristCompare,
    WeakSigmaRun,
    YosidaTest,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Converge => Command::Converge,
            Cmd::ThresholdScan => Command::ThresholdScan,
            Cmd::NormProbe => Command::NormProbe,
            Cmd::ChristCompare => Command::ChristCompare,
            Cmd::WeakSigmaRun => Command::WeakSigmaRun,
            Cmd::YosidaTest => Command::YosidaTest,
        }
    }
}

/// Experiments for the generalized derivative nonlinear Schrödinger equation.
#[derive(Debug, Parser)]
#[command(name = "gdnls", version)]
struct Args {
    command: Cmd,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized batteries (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("gdnls: cannot read {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    match execute(args.command.into(), &text, &args.out, args.seed) {
        Ok(report) => {
            for note in &report.notes {
                eprintln!("gdnls: {note}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gdnls: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
