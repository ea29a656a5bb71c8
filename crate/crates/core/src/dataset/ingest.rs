use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::manifest::Manifest;
use super::record::{Provenance, SampleRecord};
use super::{DatasetError, Diagnostic, DiagnosticKind};
use crate::digest::sha256_hex;

pub const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "tif", "tiff", "bmp", "webp"];

/// Where transcripts for real-world images come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranscriptSource {
    /// `<stem>.txt` files (UTF-8) in the given directory.
    Dir(PathBuf),
    /// JSONL rows `{"image": "<file name or stem>", "text": "..."}`.
    Jsonl(PathBuf),
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub manifest: Manifest,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Deserialize)]
struct TranscriptRow {
    image: String,
    text: String,
}

pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let entries = fs::read_dir(dir).map_err(|source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut images: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    images.sort();
    Ok(images)
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string()
}

/// Drops one trailing line terminator, the usual end of a text file.
fn strip_final_newline(mut text: String) -> String {
    if text.ends_with('\n') {
        text.pop();
        if text.ends_with('\r') {
            text.pop();
        }
    }
    text
}

fn load_jsonl(path: &Path) -> Result<HashMap<String, String>, DatasetError> {
    let raw = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut map = HashMap::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: TranscriptRow = serde_json::from_str(line).map_err(|source| DatasetError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        let key = Path::new(&row.image)
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or(&row.image)
            .to_string();
        map.insert(key, row.text);
    }
    Ok(map)
}

fn id_prefix(provenance: Provenance) -> &'static str {
    match provenance {
        Provenance::Synthetic => "syn",
        Provenance::External => "ext",
        _ => "real",
    }
}

/// Builds a manifest from a directory of images with paired transcripts.
///
/// Transcripts are stored verbatim. Images without a transcript produce a
/// `MissingTranscript` diagnostic, or a record with empty ground truth when
/// `allow_unlabeled` is set (the input to pseudo-labeling). Records carry no
/// geometry.
pub fn ingest_real(
    dir: &Path,
    provenance: Provenance,
    transcripts: &TranscriptSource,
    allow_unlabeled: bool,
) -> Result<IngestOutcome, DatasetError> {
    let jsonl = match transcripts {
        TranscriptSource::Jsonl(path) => Some(load_jsonl(path)?),
        TranscriptSource::Dir(_) => None,
    };

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut seen = HashSet::new();

    for image in list_images(dir)? {
        let name = image.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let stem = stem(&image);

        let text = match (transcripts, &jsonl) {
            (TranscriptSource::Dir(tdir), _) => {
                let path = tdir.join(format!("{stem}.txt"));
                fs::read_to_string(&path).ok().map(strip_final_newline)
            }
            (_, Some(map)) => map.get(&name).or_else(|| map.get(&stem)).cloned(),
            _ => None,
        };
        let ground_truth = match text {
            Some(t) => t,
            None if allow_unlabeled => String::new(),
            None => {
                diagnostics.push(Diagnostic::new(
                    DiagnosticKind::MissingTranscript,
                    None,
                    format!("{stem}: no transcript for {name}"),
                ));
                continue;
            }
        };

        let bytes = match fs::read(&image) {
            Ok(b) => b,
            Err(e) => {
                diagnostics.push(Diagnostic::new(
                    DiagnosticKind::UnreadableImage,
                    None,
                    format!("{name}: {e}"),
                ));
                continue;
            }
        };
        let dims = image::ImageReader::new(Cursor::new(&bytes))
            .with_guessed_format()
            .map_err(|e| e.to_string())
            .and_then(|r| r.into_dimensions().map_err(|e| e.to_string()));
        let (width, height) = match dims {
            Ok(d) => d,
            Err(e) => {
                diagnostics.push(Diagnostic::new(
                    DiagnosticKind::UnreadableImage,
                    None,
                    format!("{name}: {e}"),
                ));
                continue;
            }
        };

        let sha = sha256_hex(&bytes);
        let sample_id = format!("{}-{}", id_prefix(provenance), &sha[..16]);
        if !seen.insert(sample_id.clone()) {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::DuplicateSampleId,
                Some(&sample_id),
                format!("{name} duplicates an earlier image"),
            ));
            continue;
        }
        records.push(SampleRecord {
            sample_id,
            image_path: image.clone(),
            image_sha256: sha,
            width,
            height,
            ground_truth,
            line_boxes: Vec::new(),
            word_boxes: Vec::new(),
            provenance,
            render_meta: None,
        });
    }

    Ok(IngestOutcome {
        manifest: Manifest::new(dir, records),
        diagnostics,
    })
}
