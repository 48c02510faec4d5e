//! Desk-scale statistical battery: five bit-level kernels evaluated over
//! non-overlapping subsequences, followed by pass-ratio and p-value
//! uniformity meta-tests.

pub mod battery;
pub mod bits;
pub mod kernels;
pub mod report;
pub mod special;
pub mod uniformity;
pub mod verdict;

use thiserror::Error;

pub use battery::{run_battery, BatteryConfig, Kernel};
pub use bits::BitSeq;
pub use report::{TestReport, TestResult, TestSummary};
pub use uniformity::{pass_ratio, uniformity_tests, PassRatio, Uniformity};
pub use verdict::{Tail, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("prerequisite failed, test skipped: {0}")]
    Prerequisite(String),
    #[error("statistic undefined: {0}")]
    Undefined(String),
    #[error("no p-values")]
    Empty,
    #[error("invalid battery configuration: {0}")]
    Config(String),
    #[error("report line {line}: {message}")]
    Parse { line: usize, message: String },
}
