//! Metrics, the benchmark matrix and report rendering.

mod metrics;
mod report;
mod run;

pub use metrics::{evaluate, evaluate_at, ConfusionCounts, EvalResult, DEFAULT_THRESHOLD};
pub use report::{emit_report, render_csv, render_markdown, ReportFormat};
pub use run::{
    default_pipelines, run_benchmark, BenchConfig, BenchDataset, BenchReport, BenchRow,
    Environment, PipelineSpec, RowManifest, RowOutcome, SelectorTime,
};
