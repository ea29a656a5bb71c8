//! Converting third-party benchmark folders into bench manifests.

use std::path::{Path, PathBuf};

use darijakit_core::dataset::{ingest_real, DiagnosticKind, Manifest, Provenance, Split, TranscriptSource, IMAGE_EXTENSIONS};
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportFormat {
    /// `<stem>.<image ext>` next to `<stem>.txt`.
    ImagesTxt,
    /// Images plus one `*.jsonl` file of `{"image": ..., "text": ...}` rows.
    ImagesJsonl,
}

impl std::str::FromStr for ImportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "images+txt" | "images-txt" | "txt" => Ok(Self::ImagesTxt),
            "images+jsonl" | "images-jsonl" | "jsonl" => Ok(Self::ImagesJsonl),
            _ => Err(format!("unknown import format `{s}` (images+txt, images+jsonl)")),
        }
    }
}

fn layout(path: impl Into<PathBuf>, message: impl Into<String>) -> BenchError {
    BenchError::Layout { path: path.into(), message: message.into() }
}

fn listing(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| BenchError::Io { path: dir.to_path_buf(), source })?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    Ok(files)
}

fn has_ext(p: &Path, exts: &[&str]) -> bool {
    p.extension().and_then(|e| e.to_str()).is_some_and(|e| exts.contains(&e.to_ascii_lowercase().as_str()))
}

/// Builds a manifest (records rooted in `dir`, all on the bench split,
/// provenance `external`). Fails on the first image without a transcript.
pub fn import_external_benchmark(dir: &Path, format: ImportFormat) -> Result<Manifest, BenchError> {
    let files = listing(dir)?;
    let images: Vec<&PathBuf> = files.iter().filter(|p| has_ext(p, IMAGE_EXTENSIONS)).collect();
    if images.is_empty() {
        return Err(layout(dir, "no images found"));
    }
    let source = match format {
        ImportFormat::ImagesTxt => {
            for img in &images {
                let txt = img.with_extension("txt");
                if !txt.is_file() {
                    let stem = img.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                    return Err(layout(txt.clone(), format!("no transcript for image stem `{stem}`")));
                }
            }
            TranscriptSource::Dir(dir.to_path_buf())
        }
        ImportFormat::ImagesJsonl => {
            let jsonl: Vec<&PathBuf> = files.iter().filter(|p| has_ext(p, &["jsonl"])).collect();
            match jsonl.as_slice() {
                [one] => TranscriptSource::Jsonl((*one).clone()),
                [] => return Err(layout(dir, "no .jsonl transcript file")),
                _ => return Err(layout(jsonl[1].clone(), "more than one .jsonl file")),
            }
        }
    };
    let outcome = ingest_real(dir, Provenance::External, &source, false)?;
    if let Some(d) = outcome.diagnostics.first() {
        let name = d.message.split(':').next().unwrap_or_default();
        let path = match d.kind {
            DiagnosticKind::MissingTranscript => dir.join(name),
            _ => images.iter().find(|p| p.file_name().and_then(|n| n.to_str()) == Some(name)).map_or(dir.to_path_buf(), |p| (*p).clone()),
        };
        return Err(layout(path, d.message.clone()));
    }
    let mut manifest = outcome.manifest;
    manifest.splits = manifest.records.iter().map(|r| (r.sample_id.clone(), Split::Bench)).collect();
    Ok(manifest)
}
