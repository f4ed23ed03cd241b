//! Experiment documents, report generation and Graphviz export for the
//! `relhyp` command-line tool.

pub mod config;
pub mod dot;
pub mod error;
pub mod run;

pub use config::{parse_spec, Command, ExperimentConfig, Output, Params};
pub use dot::{collection_dot, core_graph_dot, partition_dot};
pub use error::CliError;
pub use run::{error_report, limits_from_env, run_experiment, Report, RunOutput};
