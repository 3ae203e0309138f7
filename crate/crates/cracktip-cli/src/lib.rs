//! Library side of the `cracktip` command line tool: configuration,
//! run manifests, and the stage pipelines behind each subcommand.

pub mod config;
pub mod manifest;
pub mod runner;
