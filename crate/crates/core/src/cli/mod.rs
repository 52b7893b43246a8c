//! Command-line front end: strict config ingestion, experiment
//! orchestration, CSV emission, and machine-readable run manifests.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_invert_laplace, cmd_mc_validate, cmd_response, cmd_shape, cmd_simulate, load_config,
    RunContext, TRANSFORM_NAMES,
};
pub use config::{RawConfig, RunConfig, ShapingMethod};
pub use output::{fmt_f64, CheckOutcome, CsvFile, RunManifest, CSV_SCHEMA_VERSION};
