//! Experiment orchestration behind the command-line tool.

pub mod commands;
pub mod config;
pub mod report;
pub mod svg;

pub use commands::{cmd_baseline, cmd_compare, cmd_run, cmd_scaling, cmd_transfer};
pub use config::RunConfig;
