use std::collections::HashSet;

use rayon::prelude::*;

use super::manifest::Manifest;
use super::record::SampleRecord;
use super::{Diagnostic, DiagnosticKind};
use crate::digest::sha256_file;

fn check_files(rec: &SampleRecord) -> Option<Diagnostic> {
    let id = Some(rec.sample_id.as_str());
    if !rec.image_path.is_file() {
        return Some(Diagnostic::new(
            DiagnosticKind::MissingImage,
            id,
            format!("image {} does not exist", rec.image_path.display()),
        ));
    }
    match sha256_file(&rec.image_path) {
        Ok(sha) if sha == rec.image_sha256 => None,
        Ok(sha) => Some(Diagnostic::new(
            DiagnosticKind::HashMismatch,
            id,
            format!("image hash {sha} differs from recorded {}", rec.image_sha256),
        )),
        Err(e) => Some(Diagnostic::new(
            DiagnosticKind::MissingImage,
            id,
            format!("cannot read {}: {e}", rec.image_path.display()),
        )),
    }
}

fn check_geometry(rec: &SampleRecord, out: &mut Vec<Diagnostic>) {
    let id = Some(rec.sample_id.as_str());
    let boxes = rec.line_boxes.iter().chain(rec.word_boxes.iter().map(|w| &w.bbox));
    if let Some(b) = boxes.into_iter().find(|b| !b.within(rec.width, rec.height)) {
        out.push(Diagnostic::new(
            DiagnosticKind::BoxOutOfBounds,
            id,
            format!("box {b:?} exceeds image {}x{}", rec.width, rec.height),
        ));
    }
    if !rec.word_boxes.is_empty() {
        let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
        let words: String = rec.word_boxes.iter().map(|w| squash(&w.word)).collect();
        if words != squash(&rec.ground_truth) {
            out.push(Diagnostic::new(
                DiagnosticKind::WordBoxText,
                id,
                "word boxes do not reproduce the ground truth",
            ));
        }
    }
}

/// Checks image existence and hashes, box bounds, word/text consistency,
/// id uniqueness, split references and stored statistics. An empty result
/// means the manifest is clean.
pub fn verify(manifest: &Manifest) -> Vec<Diagnostic> {
    let mut diagnostics: Vec<Diagnostic> = manifest
        .records
        .par_iter()
        .filter_map(check_files)
        .collect();

    let mut seen = HashSet::new();
    for rec in &manifest.records {
        if !seen.insert(rec.sample_id.as_str()) {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::DuplicateSampleId,
                Some(&rec.sample_id),
                "sample id appears more than once",
            ));
        }
        check_geometry(rec, &mut diagnostics);
    }

    for id in manifest.splits.keys().filter(|id| !seen.contains(id.as_str())) {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::UnknownSplitId,
            Some(id),
            "split assignment for an id missing from the manifest",
        ));
    }

    match &manifest.stored_stats {
        None => diagnostics.push(Diagnostic::new(
            DiagnosticKind::MissingStats,
            None,
            "no stored statistics to check",
        )),
        Some(stored) => {
            let actual = manifest.stats();
            let mut mismatch = |field: &str, stored: String, actual: String| {
                if stored != actual {
                    diagnostics.push(Diagnostic::new(
                        DiagnosticKind::StatsMismatch,
                        None,
                        format!("stats.{field}: stored {stored}, recomputed {actual}"),
                    ));
                }
            };
            mismatch("samples", stored.samples.to_string(), actual.samples.to_string());
            mismatch("total_words", stored.total_words.to_string(), actual.total_words.to_string());
            mismatch(
                "provenance_histogram",
                serde_json::to_string(&stored.provenance_histogram).unwrap_or_default(),
                serde_json::to_string(&actual.provenance_histogram).unwrap_or_default(),
            );
            mismatch(
                "splits",
                serde_json::to_string(&stored.splits).unwrap_or_default(),
                serde_json::to_string(&actual.splits).unwrap_or_default(),
            );
        }
    }
    diagnostics
}
