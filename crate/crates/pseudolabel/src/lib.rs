//! Pseudo-labeling of unlabeled images through a vision-language API.
//!
//! Requests go through a provider adapter ([`config::ProviderKind`]), a
//! sliding-window rate limiter and an on-disk response cache keyed by
//! image, prompt and model. Labels are kept apart from ground truth until
//! explicitly applied.

pub mod batch;
pub mod cache;
pub mod clock;
pub mod config;
pub mod labeler;
pub mod provider;
pub mod transport;

pub use batch::{apply_labels, label_batch, read_labels, BatchError, BatchOutcome, Failure, FailureReport};
pub use config::{LabelerConfig, ProviderKind, Secret, DEFAULT_PROMPT};
pub use labeler::{LabelError, Labeler, PseudoLabel};
