//! Experiment plumbing shared by the command-line tool and the tests.

mod baseline;
mod config;
mod eval;
mod train;

pub use baseline::{fin_profiles, pid_baseline, PidController, PidGains};
pub use config::{ExperimentConfig, NetworkShape};
pub use eval::{
    check_policy_shape, compare, comparison_table, evaluate, run_episode, write_comparison_csv,
    write_trajectory_csv, Controller, EpisodeResult, EvalReport, MaskReport, TraceRow,
};
pub use train::{run_training, TrainSummary, TransferSpec};
