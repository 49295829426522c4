//! File formats, configuration and the `nvfield` command line on top of
//! `nvfield-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod svg;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use output::OutputDir;
