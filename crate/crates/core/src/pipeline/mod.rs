//! The iterative prune / fine-tune loop and its report artifacts.

mod config;
mod report;
mod run;
mod state;
pub mod svg;

pub use config::{AccuracyEval, ClusterSettings, HdapConfig};
pub use report::{emit_report, load_report, strip_wall_clock};
pub use run::{
    cluster_fleet, hardware_evaluation_s, load_fleet, load_model, mape_table, run_hdap, time_prediction,
    AccelerationTable, AccelerationWallClock, ClusterLatencyRow, EvalTimeSeries, EvalTimeWallClock,
    IterationRecord, IterationWallClock, MapeRow, ModelSummary, RunReport, RunWallClock,
};
pub use state::{fine_tune_sim, TuningState};
