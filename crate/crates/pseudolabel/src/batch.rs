use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use darijakit_core::dataset::{write_atomic, DatasetError, Manifest, SampleRecord, Split};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeler::{LabelError, Labeler, PseudoLabel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub sample_id: String,
    pub error: LabelError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureReport {
    pub model_id: String,
    pub attempted: usize,
    pub labeled: usize,
    pub failures: Vec<Failure>,
}

#[derive(Debug)]
pub struct BatchOutcome {
    /// Every label in the output file, in manifest order.
    pub labels: Vec<PseudoLabel>,
    pub failures: Vec<Failure>,
    /// Labels carried over from an earlier run.
    pub resumed: usize,
    pub report_path: PathBuf,
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("{0}; batch aborted (completed labels were saved)")]
    Auth(LabelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    BadLabelLine {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("pseudo-labels are untrusted; pass --trust-pseudolabels to write them into ground truth")]
    Untrusted,
}

/// `labels.jsonl` -> `labels.failures.json`.
pub fn report_path(labels: &Path) -> PathBuf {
    let stem = labels.file_stem().and_then(|s| s.to_str()).unwrap_or("labels");
    labels.with_file_name(format!("{stem}.failures.json"))
}

pub fn read_labels(path: &Path) -> Result<Vec<PseudoLabel>, BatchError> {
    let raw = fs::read_to_string(path).map_err(|source| BatchError::Io { path: path.to_path_buf(), source })?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| BatchError::BadLabelLine { path: path.to_path_buf(), line: i + 1, source })
        })
        .collect()
}

fn needs_label(r: &SampleRecord) -> bool {
    r.ground_truth.trim().is_empty()
}

/// Labels every record without ground truth. Labels already in `out` are
/// kept and not requested again. Only an auth failure stops the batch;
/// everything else lands in the failure report.
pub fn label_batch(manifest: &Manifest, labeler: &Labeler, out: &Path) -> Result<BatchOutcome, BatchError> {
    let targets: Vec<&SampleRecord> = manifest.records.iter().filter(|r| needs_label(r)).collect();
    let target_ids: HashSet<&str> = targets.iter().map(|r| r.sample_id.as_str()).collect();

    let mut done: HashMap<String, PseudoLabel> = HashMap::new();
    if out.exists() {
        for l in read_labels(out)? {
            if target_ids.contains(l.sample_id.as_str()) && l.model_id == labeler.config().model_id {
                done.insert(l.sample_id.clone(), l);
            }
        }
    }
    let resumed = done.len();
    let pending: Vec<&SampleRecord> = targets.iter().copied().filter(|r| !done.contains_key(&r.sample_id)).collect();

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<(usize, Result<PseudoLabel, LabelError>)>> = Mutex::new(Vec::new());
    let workers = labeler.config().concurrency.max(1).min(pending.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(rec) = pending.get(i) else { break };
                let result = fs::read(&rec.image_path)
                    .map_err(|e| LabelError::BadImage { detail: format!("{}: {e}", rec.image_path.display()) })
                    .and_then(|bytes| labeler.label_image(&rec.sample_id, &bytes));
                if let Err(e) = &result {
                    tracing::warn!(sample_id = %rec.sample_id, error = %e, "labeling failed");
                    if e.is_auth() {
                        abort.store(true, Ordering::SeqCst);
                    }
                }
                results.lock().unwrap().push((i, result));
            });
        }
    });

    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(i, _)| *i);
    let mut failures = Vec::new();
    let mut auth_error = None;
    for (i, r) in results {
        match r {
            Ok(label) => {
                done.insert(label.sample_id.clone(), label);
            }
            Err(e) => {
                if e.is_auth() && auth_error.is_none() {
                    auth_error = Some(e.clone());
                }
                failures.push(Failure { sample_id: pending[i].sample_id.clone(), error: e });
            }
        }
    }

    let labels: Vec<PseudoLabel> = targets.iter().filter_map(|r| done.remove(&r.sample_id)).collect();
    let mut body = Vec::new();
    for l in &labels {
        body.extend(serde_json::to_vec(l).expect("label serializes"));
        body.push(b'\n');
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| BatchError::Io { path: parent.to_path_buf(), source })?;
    }
    write_atomic(out, &body)?;

    let report = FailureReport {
        model_id: labeler.config().model_id.clone(),
        attempted: targets.len(),
        labeled: labels.len(),
        failures: failures.clone(),
    };
    let report_path = report_path(out);
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    write_atomic(&report_path, &json)?;

    tracing::info!(labeled = labels.len(), resumed, failed = failures.len(), "labeling finished");
    if let Some(e) = auth_error {
        return Err(BatchError::Auth(e));
    }
    Ok(BatchOutcome { labels, failures, resumed, report_path })
}

/// Copies pseudo-labels into the ground truth of unlabeled records,
/// optionally only for one split. Refuses unless `trust` is set.
pub fn apply_labels(
    manifest: &Manifest,
    labels: &[PseudoLabel],
    trust: bool,
    only_split: Option<Split>,
) -> Result<(Manifest, usize), BatchError> {
    if !trust {
        return Err(BatchError::Untrusted);
    }
    let by_id: HashMap<&str, &PseudoLabel> = labels.iter().map(|l| (l.sample_id.as_str(), l)).collect();
    let mut out = manifest.clone();
    let mut applied = 0;
    for r in &mut out.records {
        if !needs_label(r) {
            continue;
        }
        if only_split.is_some_and(|s| manifest.splits.get(&r.sample_id) != Some(&s)) {
            continue;
        }
        if let Some(l) = by_id.get(r.sample_id.as_str()) {
            r.ground_truth = l.text.clone();
            applied += 1;
        }
    }
    out.stored_stats = None;
    Ok((out, applied))
}
