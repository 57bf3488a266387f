//! Experiment plumbing: suites of runs, dominance checks, reports and calibration.

mod calibrate;
mod compare;
mod report;
mod suite;

pub use calibrate::{calibrate, Calibration, CalibrationParams};
pub use compare::{compare_dominance, dominance_from_reports, Dominance, MAX_WITNESSES};
pub use report::{cumulative_ratios, emit_report, ratio_table, render_ratio_table, to_csv, to_json, Format, RatioRow, CSV_HEADER};
pub use suite::{
    heuristic_from_token, run_suite, ConfigSpec, Instance, InstanceSource, ResultRow, RunSpec, SharedOrder,
    DEFAULT_NODE_LIMIT, DEFAULT_TIME_LIMIT,
};
