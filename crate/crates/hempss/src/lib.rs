//! File formats and the command-line driver for `hempss-core`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::path::Path;

pub use commands::{run, Command, Options, Report};
pub use config::RunConfig;
pub use error::CliError;

/// Writes every file of a report under `dir`, creating it if needed.
pub fn write_report(report: &Report, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in &report.files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}
