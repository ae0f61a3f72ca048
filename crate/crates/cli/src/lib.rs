//! Library surface of the command-line front end, exposed for integration
//! tests.

pub mod config;
pub mod dispatch;

pub use config::{emit_config, parse_config, Experiment, OutputFormat, RunConfig};
pub use dispatch::{dispatch, export_operator, DispatchOutcome};
