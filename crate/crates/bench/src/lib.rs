//! Benchmark runs, reports and leaderboards.
//!
//! [`run::run_benchmark`] asks a [`adapter::ModelAdapter`] for one
//! hypothesis per bench sample and scores it with the shared metrics.
//! Adapter failures exclude a sample with a reason; they are never scored
//! as empty output.

use std::path::PathBuf;

use darijakit_core::dataset::{DatasetError, Diagnostic};
use thiserror::Error;

pub mod adapter;
pub mod compare;
pub mod import;
pub mod run;

pub use adapter::{AdapterError, AdapterKind, AdapterSpec, ModelAdapter, NoisyOracle, SampleInput};
pub use compare::{compare, render_svg, Leaderboard, LeaderboardRow, PlotSpec};
pub use import::{import_external_benchmark, ImportFormat};
pub use run::{run_benchmark, run_with_adapter, BenchReport, ExclusionReason, Excluded, RunOptions, RunTiming};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("manifest failed verification ({} problem(s); first: {})", .0.len(), .0[0])]
    Unverified(Vec<Diagnostic>),
    #[error("manifest has no bench samples")]
    NoBenchSamples,
    #[error("{0}")]
    AdapterUnavailable(String),
    #[error("invalid adapter: {0}")]
    InvalidAdapter(String),
    #[error("{0}")]
    InvalidConfig(String),
    #[error("report for {model_id} is on benchmark {found}, expected {expected}")]
    MismatchedBenchmark { expected: String, found: String, model_id: String },
    #[error("report for {model_id} used a different normalization config")]
    MismatchedNormalization { model_id: String },
    #[error("no reports to compare")]
    NoReports,
    #[error("{}: {message}", path.display())]
    Layout { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}
