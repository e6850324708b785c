//! Workload generation, manifests and the subcommands behind the `pbs`
//! binary.

pub mod cli;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod workload;

pub use error::CliError;
pub use manifest::{InputFiles, Inputs, RunManifest};
pub use workload::{Scatter, WorkloadKind, WorkloadSpec};
