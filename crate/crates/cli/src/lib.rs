//! Workflow driver for the porefill toolkit: configuration, the staged
//! pipeline with its manifest, the scaling benchmark and plot scripts.

pub mod bench;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod workflow;

pub use error::{CliError, Result};
