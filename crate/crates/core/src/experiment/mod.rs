//! Reproducible experiment runner.
//!
//! A validated [`ExperimentConfig`] expands into parameter tuples; each
//! (tuple, trial) pair gets its own substream and runs independently.

mod config;
mod output;
mod runner;
mod verify;

pub use config::{
    parse_param_flag, CdfSampler, ExperimentConfig, ExperimentKind, OutputFormat, Plan, PlanSpec,
};
pub use output::{format_float, write_csv, write_json, CSV_HEADER, JSON_SCHEMA_PATH};
pub use runner::{
    delta_stat, param_tuples, rule_stat, run_experiment, tau_stat, ExperimentRecord, ParamTuple,
    RunOutput, SummaryRow,
};
pub use verify::{check_output, verify_bounds, BoundPoint, BoundReport};
