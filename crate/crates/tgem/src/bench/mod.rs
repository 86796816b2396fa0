//! Benchmark orchestration: grid configuration, deterministic resumable
//! execution, and report generation.

pub mod config;
pub mod report;
pub mod runner;
pub mod svg;

pub use config::BenchConfig;
pub use report::{
    distance_by_horizon, summarize, write_horizon_report, write_report, HorizonBucket,
    SummaryTables,
};
pub use runner::{run_benchmark, PerEdgeRow, ResultRow, RunOptions, RunSummary};
