//! End-to-end permuted block-sparse attention and its metrics.

mod config;
mod coverage;
mod pbs;
mod report;
mod sweep;

pub use config::{PipelineConfig, Precision, Strategy};
pub use coverage::{attention_coverage, MAX_COVERAGE_TOKENS};
pub use pbs::{pbs_attention, pbs_attention_detailed, PipelineRun};
pub use report::{PipelineReport, StageTimings};
pub use sweep::{density_sweep, SweepRow};
