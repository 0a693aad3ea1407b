//! Experiment orchestration for the `anisoreach` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{load, parse, CheckKind, ConfigError, ExperimentConfig};
pub use run::{run, CheckOutcome, RunError, Summary};
