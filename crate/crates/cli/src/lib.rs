//! Batch driver for the certified solver: configuration, pipeline and outputs.

pub mod artifacts;
pub mod config;
pub mod run;

pub use artifacts::{emit_plot_data, PlotData, RunArtifacts};
pub use config::{ConfigError, RunConfig};
pub use run::{run, ExitStatus, RunOutcome};
