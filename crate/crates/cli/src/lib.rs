//! Batch front end: configuration files in, deterministic CSV tables out.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{emit_config, parse_config, parse_config_for, GridSpec, Grids, ModelConfig, RunConfig, Spacing, Task};
pub use error::{CliError, ConfigError};
pub use output::{render_csv, write_outputs, Outputs};
pub use run::{execute, execute_with_threads, Table, Value};
