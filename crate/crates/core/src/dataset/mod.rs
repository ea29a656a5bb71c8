//! Sample records and manifests shared by generated data, ingested real
//! data and benchmarks.

mod ingest;
mod manifest;
mod ops;
mod record;
mod verify;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ingest::{ingest_real, IngestOutcome, TranscriptSource, IMAGE_EXTENSIONS};
pub use manifest::{
    relative_to, write_atomic, Manifest, ManifestStats, Split, StatsFile, IMAGES_DIR, MANIFEST_FILE,
    SCHEMA_VERSION, SPLITS_FILE, STATS_FILE,
};
pub use ops::{merge, split, split_counts, MixClass, TargetMix};
pub use record::{AppliedDistortion, BBox, Provenance, RenderMeta, SampleRecord, WordBox};
pub use verify::verify;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {source}", path.display())]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("manifest schema version {found} is newer than supported version {supported}")]
    UnsupportedSchema { found: u32, supported: u32 },
    #[error("duplicate sample id {0}")]
    DuplicateSampleId(String),
    #[error("{} already exists (pass --overwrite to replace it)", .0.display())]
    OutputExists(PathBuf),
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("invalid target mix: {0}")]
    InvalidMix(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    MissingImage,
    HashMismatch,
    StatsMismatch,
    MissingStats,
    BoxOutOfBounds,
    WordBoxText,
    DuplicateSampleId,
    UnknownSplitId,
    MissingTranscript,
    UnreadableImage,
}

/// A non-fatal finding reported by `verify` or `ingest_real`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_id: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, sample_id: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            kind,
            sample_id: sample_id.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.sample_id {
            Some(id) => write!(f, "{id}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}
