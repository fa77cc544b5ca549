//! Experiment driver for the `gdnls` command-line tool: configuration,
//! initial-data presets, experiment commands and CSV/JSON artifacts.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod presets;

use std::path::Path;

pub use config::{parse_config, Command, Experiment, ExperimentConfig};
pub use error::{ConfigError, HarnessError, HarnessResult};
pub use experiments::{run, Report};

/// Parse `text` for `command`, optionally override the seed, run, and
/// write the artifacts into `out`.
pub fn execute(command: Command, text: &str, out: &Path, seed: Option<u64>) -> HarnessResult<Report> {
    let mut cfg = parse_config(text, Some(command))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = run(&cfg)?;
    output::write_all(out, &report.artifacts)?;
    Ok(report)
}
