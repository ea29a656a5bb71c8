//! Core building blocks for Darija OCR data generation and evaluation.
//!
//! - [`textnorm`]: the scoring-time normalization protocol (harakat removal,
//!   line-break and whitespace standardization).
//! - [`metrics`]: Levenshtein alignment, CER/WER and run aggregation.
//! - [`shaping`]: table-driven Arabic joining, lam-alef ligatures and a
//!   simplified bidirectional reordering used by the synthetic renderer.
//! - [`dataset`]: sample records, JSONL manifests, splits, merging and
//!   integrity verification.

pub mod dataset;
pub mod digest;
pub mod metrics;
pub mod shaping;
pub mod textnorm;

/// Version string embedded in every artifact this toolkit writes.
pub const TOOL_VERSION: &str = concat!("darijakit ", env!("CARGO_PKG_VERSION"));
