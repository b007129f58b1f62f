//! Configuration-driven experiments on top of `kfp-core`: solves, estimate
//! suites, convergence studies, symbol classification and model-kernel
//! checks, with CSV, KFP1 snapshot and SVG output.

pub mod catalog;
pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use run::{run, LabError, RunSummary};
