//! Experiment configuration, orchestration and machine-readable reporting.
//!
//! Every command resolves an [`ExperimentConfig`] (JSON file first, flags on top),
//! runs the corresponding checks or planner evaluations, and writes CSV/JSON whose
//! bytes depend only on the resolved configuration.

pub mod cli;
mod commands;
mod config;
mod records;

pub use commands::{
    cmd_check, cmd_dump, cmd_run, write_json, write_run_outputs, CheckOutcome, RunOutcome, DESK_K_MAX, DESK_P_MAX,
    DUMP_HEADER,
};
pub use config::{ExperimentConfig, FixtureChoice};
pub use records::{
    evaluate, fmt_f64, summarize_episodes, write_records_csv, EpisodeSummary, MeanCi, RunRecord, CSV_HEADER,
};

use crate::error::{Error, Result};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "LINPLAN_WORKERS";

/// Process exit codes.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Worker pool sized from [`WORKERS_ENV`]; all cores when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let n = match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidParams(format!("{WORKERS_ENV} must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot build worker pool: {e}")))
}
