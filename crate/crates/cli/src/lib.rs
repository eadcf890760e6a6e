//! Problem-file ingestion, commands and JSON reports for `lmi-iis-core`.

pub mod args;
pub mod commands;
pub mod format;

pub use args::Cli;
pub use commands::{run, CliError, Output};
pub use format::{InputError, MatrixFile, ProblemFile};
