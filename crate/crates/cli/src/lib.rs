//! Command-line driver: configuration, run directories and subcommands.

pub mod cache;
pub mod commands;
pub mod config;
pub mod output;

pub use commands::{evaluate, mine, record, reproduce, EvaluateArgs, RecordArgs, ReproduceArgs, Session};
pub use config::RunConfig;
