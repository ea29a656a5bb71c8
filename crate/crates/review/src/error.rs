use std::path::PathBuf;

use darijakit_core::dataset::DatasetError;
use thiserror::Error;

use crate::task::Status;

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error("label refers to sample `{0}`, which is not in the manifest")]
    UnknownSampleId(String),
    #[error("sample `{0}` is labeled more than once")]
    DuplicateLabel(String),
    #[error("no task `{0}`")]
    UnknownTask(String),
    #[error("task {task_id} is not claimed by you{}", holder.as_ref().map(|h| format!(" (held by {h})")).unwrap_or_default())]
    NotClaimedByYou { task_id: String, holder: Option<String> },
    #[error("task {task_id}: cannot {transition} from {from}")]
    IllegalTransition { task_id: String, from: Status, transition: &'static str },
    #[error("empty correction; reject the task instead")]
    EmptyCorrection,
    #[error("reviewer must be a non-empty name of at most 128 characters")]
    InvalidReviewer,
    #[error("{pending} pending and {in_review} in-review tasks remain; export with --partial to skip them")]
    Incomplete { pending: usize, in_review: usize },
    #[error("nothing to export: no approved or corrected tasks")]
    EmptyBench,
    #[error("{0} already holds a review project")]
    ProjectExists(PathBuf),
    #[error("{}:{line}: {detail}", path.display())]
    Corrupt { path: PathBuf, line: usize, detail: String },
    #[error("source manifest changed since the project was created (digest {found}, expected {expected})")]
    ManifestChanged { expected: String, found: String },
    #[error("{}:{line}: {detail}", path.display())]
    BadLabels { path: PathBuf, line: usize, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

impl ReviewError {
    /// Stable machine-readable name, used in API error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::UnknownSampleId(_) => "unknown_sample_id",
            Self::DuplicateLabel(_) => "duplicate_label",
            Self::UnknownTask(_) => "unknown_task",
            Self::NotClaimedByYou { .. } => "not_claimed_by_you",
            Self::IllegalTransition { .. } => "illegal_transition",
            Self::EmptyCorrection => "empty_correction",
            Self::InvalidReviewer => "invalid_reviewer",
            Self::Incomplete { .. } => "incomplete_project",
            Self::EmptyBench => "empty_bench",
            Self::ProjectExists(_) => "project_exists",
            Self::Corrupt { .. } => "corrupt_log",
            Self::ManifestChanged { .. } => "manifest_changed",
            Self::BadLabels { .. } => "bad_labels",
            Self::Io { .. } => "io",
            Self::Dataset(_) => "dataset",
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> ReviewError + '_ {
    move |source| ReviewError::Io { path: path.to_path_buf(), source }
}
