//! Config-driven front end: scenario runs, property suites and control
//! searches, with CSV artifacts and a plain-text run report.
//!
//! Config files are flat INI-style `key = value` sections; lists are
//! whitespace-separated numbers. All numeric output uses 12 significant
//! digits with `.` as the decimal separator, so repeated runs produce
//! byte-identical artifacts.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_run, cmd_search, cmd_suite, ExitCode};
pub use config::{ConfigError, RunConfig, ScenarioKind};
