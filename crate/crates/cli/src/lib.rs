//! Command-line front end for `qspeed-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod table;

use std::fs;
use std::path::Path;

pub use commands::{cmd_detect, cmd_regions, cmd_speed};
pub use config::{RunConfig, Settings};
pub use error::CliError;
pub use figures::cmd_figure;
pub use table::{Format, Table};

/// Writes `text` to `out`, or stdout when `None`.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
