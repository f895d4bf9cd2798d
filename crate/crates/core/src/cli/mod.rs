//! Batch front end: config files in, CSV and JSON artifacts out.

pub mod config;
pub mod dispatch;

pub use config::{parse_config, parse_config_str, Command, RunSpec};
pub use dispatch::{build_target, dispatch, DispatchOptions, Outcome};
