//! Library side of the `litlvm` command-line tool: configuration, CSV I/O,
//! model persistence and the subcommands themselves.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod model;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use model::SavedModel;
