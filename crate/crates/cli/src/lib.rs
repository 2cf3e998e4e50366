//! Library side of the `posnb` binary, so tests can drive commands without
//! spawning a process.

pub mod commands;
pub mod datasets;
pub mod error;
pub mod manifest;

pub use datasets::DatasetPaths;
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
