//! Configuration, file formats and subcommands of the `idealface` tool.

pub mod commands;
pub mod config;
pub mod output;
