//! Library side of the `dcf` command: scenario files, presets and command
//! bodies.

pub mod commands;
pub mod error;
pub mod file;

pub use error::{CliError, Result};
pub use file::ScenarioFile;
