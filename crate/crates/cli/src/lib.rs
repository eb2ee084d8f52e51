//! Command-line orchestration: configuration, dataset manifests, the
//! on-disk artifact layout and one function per CLI verb.

pub mod artifacts;
pub mod cli;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod synth;

pub use cli::{run, Cli};
