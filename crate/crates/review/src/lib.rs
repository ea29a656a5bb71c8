//! Human review of pseudo-labels.
//!
//! A [`Project`] holds one [`AnnotationTask`] per pseudo-label. Every state
//! change is appended to `events.jsonl` and fsynced before it is
//! acknowledged, so replaying the log always yields the last acknowledged
//! state. [`api::router`] exposes the project over HTTP.

pub mod api;
pub mod error;
pub mod log;
pub mod project;
pub mod task;

pub use error::ReviewError;
pub use log::{LogEntry, State};
pub use project::{
    read_label_rows, ExportOptions, ExportSummary, LabelInput, Progress, Project, ProjectMeta, ProjectOptions,
};
pub use task::{Action, AnnotationTask, Status, Transition};
