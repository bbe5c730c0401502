//! File formats, inference client and command-line driver for the log parser.

pub mod cli;
pub mod dataset;
pub mod inference;
pub mod manifest;
pub mod report;
pub mod run_file;
pub mod shots_file;

pub use llmparser_core as core;
