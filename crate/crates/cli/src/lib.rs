//! Configuration, CSV output and experiment dispatch for the `ddmagsim` binary.

pub mod config;
pub mod csv;
pub mod run;

pub use config::{parse_config, ConfigError, Experiment, RunConfig};
pub use csv::{render_csv, write_csv, CsvError};
pub use run::{execute, AppError, Invocation};
