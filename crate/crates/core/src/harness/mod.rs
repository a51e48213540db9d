//! Experiment harness: run configurations, presets, training runs with
//! per-epoch CSV metrics, multi-optimizer comparisons and gradient checks.

mod config;
mod gradcheck;
mod run;

pub use config::{DataSource, OptimizerKind, RunConfig, TargetSide, TeacherKind, PRESET_DIR_ENV};
pub use gradcheck::{
    central_difference, describe_coordinate, gradcheck, relative_error, GradcheckReport, FD_STEP, REL_ERR_FLOOR,
};
pub use run::{
    build_optimizer, compare, compare_merged_path, compare_member_path, load_dataset, params_path_for,
    read_params, run, run_prepared, Comparison, Prepared, RunRecord, RunStatus, RunSummary, INIT_RANGE,
    METRICS_HEADER,
};
