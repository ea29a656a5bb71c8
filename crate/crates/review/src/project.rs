//! A review project on disk: `project.json`, the event log and an
//! occasional snapshot. One writer at a time appends to the log; readers
//! see the latest published state without locking.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use arc_swap::ArcSwap;
use darijakit_core::dataset::{write_atomic, Manifest, Provenance, SampleRecord, Split};
use darijakit_core::TOOL_VERSION;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, ReviewError};
use crate::log::{replay, EventLog, LogEntry, State};
use crate::task::{Action, AnnotationTask, Status, Transition};

pub const PROJECT_FILE: &str = "project.json";
pub const LOG_FILE: &str = crate::log::LOG_FILE_NAME;
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const PROJECT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub schema_version: u32,
    pub tool_version: String,
    /// Directory of the manifest the labels refer to.
    pub manifest_dir: PathBuf,
    pub manifest_digest: String,
}

/// One row of a labels JSONL file. Other fields are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelInput {
    pub sample_id: String,
    pub text: String,
}

pub fn read_label_rows(path: &Path) -> Result<Vec<LabelInput>, ReviewError> {
    let raw = fs::read_to_string(path).map_err(io_err(path))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ReviewError::BadLabels {
                path: path.to_path_buf(),
                line: i + 1,
                detail: e.to_string(),
            })
        })
        .collect()
}

pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

fn system_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

#[derive(Clone)]
pub struct ProjectOptions {
    /// Write a snapshot after this many log entries.
    pub snapshot_every: usize,
    pub clock: Clock,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        Self { snapshot_every: 64, clock: Arc::new(system_ms) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub total: usize,
    pub pending: usize,
    pub in_review: usize,
    pub corrected: usize,
    pub approved: usize,
    pub rejected: usize,
    /// Approved or corrected tasks per provenance tag.
    pub done_by_provenance: BTreeMap<Provenance, usize>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportOptions {
    /// Skip pending and in-review tasks instead of refusing.
    pub partial: bool,
    pub overwrite: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExportSummary {
    pub path: PathBuf,
    pub samples: usize,
    pub provenance: BTreeMap<Provenance, usize>,
    pub corrected: usize,
    pub rejected: usize,
    pub skipped_unfinished: usize,
    pub manifest_digest: String,
}

struct Writer {
    log: EventLog,
    state: State,
    since_snapshot: usize,
}

pub struct Project {
    dir: PathBuf,
    meta: ProjectMeta,
    manifest: Manifest,
    writer: Mutex<Writer>,
    current: ArcSwap<State>,
    opts: ProjectOptions,
}

pub fn task_id(n: usize) -> String {
    format!("t-{n:05}")
}

impl Project {
    /// Creates one pending task per label, in label order.
    pub fn create(dir: &Path, manifest: &Manifest, labels: &[LabelInput]) -> Result<Self, ReviewError> {
        Self::create_with(dir, manifest, labels, ProjectOptions::default())
    }

    pub fn create_with(
        dir: &Path,
        manifest: &Manifest,
        labels: &[LabelInput],
        opts: ProjectOptions,
    ) -> Result<Self, ReviewError> {
        if dir.join(PROJECT_FILE).exists() || dir.join(LOG_FILE).exists() {
            return Err(ReviewError::ProjectExists(dir.to_path_buf()));
        }
        let mut seen = HashSet::new();
        for l in labels {
            if manifest.get(&l.sample_id).is_none() {
                return Err(ReviewError::UnknownSampleId(l.sample_id.clone()));
            }
            if !seen.insert(l.sample_id.as_str()) {
                return Err(ReviewError::DuplicateLabel(l.sample_id.clone()));
            }
        }
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let manifest_dir = manifest.root.canonicalize().map_err(io_err(&manifest.root))?;
        let meta = ProjectMeta {
            schema_version: PROJECT_SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            manifest_dir,
            manifest_digest: manifest.digest(),
        };
        let now = (opts.clock)();
        let entries: Vec<LogEntry> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| LogEntry {
                seq: i as u64 + 1,
                task_id: task_id(i + 1),
                transition: Transition::Create {
                    sample_id: l.sample_id.clone(),
                    provenance: manifest.get(&l.sample_id).expect("checked above").provenance,
                    pseudo_label: l.text.clone(),
                },
                timestamp: now,
            })
            .collect();
        let (mut log, _) = EventLog::open(&dir.join(LOG_FILE))?;
        log.append(&entries)?;
        let mut json = serde_json::to_vec_pretty(&meta).expect("meta serializes");
        json.push(b'\n');
        write_atomic(&dir.join(PROJECT_FILE), &json)?;
        drop(log);
        Self::open_with(dir, opts)
    }

    pub fn open(dir: &Path) -> Result<Self, ReviewError> {
        Self::open_with(dir, ProjectOptions::default())
    }

    pub fn open_with(dir: &Path, opts: ProjectOptions) -> Result<Self, ReviewError> {
        let meta_path = dir.join(PROJECT_FILE);
        let raw = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
        let meta: ProjectMeta = serde_json::from_str(&raw).map_err(|e| ReviewError::Corrupt {
            path: meta_path.clone(),
            line: 0,
            detail: e.to_string(),
        })?;
        if meta.schema_version > PROJECT_SCHEMA_VERSION {
            return Err(ReviewError::Corrupt {
                path: meta_path,
                line: 0,
                detail: format!("schema version {} is newer than supported", meta.schema_version),
            });
        }
        let manifest = Manifest::load(&meta.manifest_dir)?;
        let found = manifest.digest();
        if found != meta.manifest_digest {
            return Err(ReviewError::ManifestChanged { expected: meta.manifest_digest.clone(), found });
        }

        let log_path = dir.join(LOG_FILE);
        let (log, entries) = EventLog::open(&log_path)?;
        let state = match load_snapshot(dir) {
            Some(snap) if entries.last().map_or(0, |e| e.seq) >= snap.seq => {
                replay(snap, &entries, &log_path).or_else(|e| {
                    tracing::warn!(error = %e, "snapshot does not fit the log; replaying from empty");
                    replay(State::default(), &entries, &log_path)
                })?
            }
            _ => replay(State::default(), &entries, &log_path)?,
        };
        Ok(Self {
            dir: dir.to_path_buf(),
            meta,
            manifest,
            current: ArcSwap::from_pointee(state.clone()),
            writer: Mutex::new(Writer { log, state, since_snapshot: 0 }),
            opts,
        })
    }

    /// Rebuilds state from the log alone, ignoring any snapshot.
    pub fn replay_log(dir: &Path) -> Result<State, ReviewError> {
        let log_path = dir.join(LOG_FILE);
        let (_, entries) = EventLog::open(&log_path)?;
        replay(State::default(), &entries, &log_path)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn meta(&self) -> &ProjectMeta {
        &self.meta
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    /// Latest acknowledged state.
    pub fn state(&self) -> Arc<State> {
        self.current.load_full()
    }

    pub fn task(&self, task_id: &str) -> Option<AnnotationTask> {
        self.current.load().get(task_id).cloned()
    }

    pub fn sample(&self, sample_id: &str) -> Option<&SampleRecord> {
        let state = self.current.load();
        state.tasks.iter().any(|t| t.sample_id == sample_id).then(|| self.manifest.get(sample_id)).flatten()
    }

    pub fn progress(&self) -> Progress {
        let state = self.current.load();
        let mut p = Progress { total: state.tasks.len(), ..Default::default() };
        for t in &state.tasks {
            match t.status {
                Status::Pending => p.pending += 1,
                Status::InReview => p.in_review += 1,
                Status::Corrected => p.corrected += 1,
                Status::Approved => p.approved += 1,
                Status::Rejected => p.rejected += 1,
            }
            if t.is_exportable() {
                *p.done_by_provenance.entry(t.provenance).or_default() += 1;
            }
        }
        p
    }

    /// Moves the oldest pending task to `in_review` for `reviewer`.
    pub fn claim_next(&self, reviewer: &str) -> Result<Option<AnnotationTask>, ReviewError> {
        let reviewer = valid_reviewer(reviewer)?;
        let mut w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let Some(id) = w.state.tasks.iter().find(|t| t.status == Status::Pending).map(|t| t.task_id.clone()) else {
            return Ok(None);
        };
        self.commit(&mut w, &id, Transition::Claim { reviewer: reviewer.to_string() }).map(Some)
    }

    pub fn submit(&self, task_id: &str, action: Action, reviewer: &str) -> Result<AnnotationTask, ReviewError> {
        let reviewer = valid_reviewer(reviewer)?;
        let mut w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        self.commit(&mut w, task_id, action.into_transition(reviewer))
    }

    /// Back to `pending`. With a reviewer, an in-review task must be theirs.
    pub fn release(&self, task_id: &str, reviewer: Option<&str>) -> Result<AnnotationTask, ReviewError> {
        let reviewer = reviewer.map(valid_reviewer).transpose()?;
        let mut w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        self.commit(&mut w, task_id, Transition::Release { reviewer: reviewer.map(String::from) })
    }

    fn commit(&self, w: &mut Writer, task_id: &str, transition: Transition) -> Result<AnnotationTask, ReviewError> {
        let task = w.state.get(task_id).ok_or_else(|| ReviewError::UnknownTask(task_id.to_string()))?;
        crate::task::check(task, &transition)?;
        let entry = LogEntry {
            seq: w.state.seq + 1,
            task_id: task_id.to_string(),
            transition,
            timestamp: (self.opts.clock)(),
        };
        w.log.append(std::slice::from_ref(&entry))?;
        w.state.apply(&entry).expect("checked transition applies");
        self.current.store(Arc::new(w.state.clone()));
        w.since_snapshot += 1;
        if w.since_snapshot >= self.opts.snapshot_every.max(1) {
            match write_snapshot(&self.dir, &w.state) {
                Ok(()) => w.since_snapshot = 0,
                Err(e) => tracing::warn!(error = %e, "snapshot failed; the log is still authoritative"),
            }
        }
        tracing::debug!(seq = entry.seq, task_id, transition = entry.transition.name(), "committed");
        Ok(w.state.get(task_id).expect("task exists").clone())
    }

    /// Writes a snapshot of the current state.
    pub fn checkpoint(&self) -> Result<(), ReviewError> {
        let mut w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        write_snapshot(&self.dir, &w.state)?;
        w.since_snapshot = 0;
        Ok(())
    }

    /// The benchmark manifest for the current state, without writing it.
    pub fn export_manifest(&self, opts: ExportOptions) -> Result<Manifest, ReviewError> {
        let state = self.state();
        let (pending, in_review) = (state.count(Status::Pending), state.count(Status::InReview));
        if (pending > 0 || in_review > 0) && !opts.partial {
            return Err(ReviewError::Incomplete { pending, in_review });
        }
        let mut records = Vec::new();
        for t in state.tasks.iter().filter(|t| t.is_exportable()) {
            let mut rec = self.manifest.get(&t.sample_id).expect("task samples are in the manifest").clone();
            rec.ground_truth = t.final_text().to_string();
            records.push(rec);
        }
        if records.is_empty() {
            return Err(ReviewError::EmptyBench);
        }
        let mut out = Manifest::new(&self.manifest.root, records);
        out.splits = out.records.iter().map(|r| (r.sample_id.clone(), Split::Bench)).collect();
        out.generator = Some(serde_json::json!({
            "tool_version": TOOL_VERSION,
            "stage": "review_export",
            "source_manifest_digest": self.meta.manifest_digest,
            "review": {
                "approved": state.count(Status::Approved),
                "corrected": state.count(Status::Corrected),
                "rejected": state.count(Status::Rejected),
                "skipped_unfinished": pending + in_review,
                "partial": opts.partial,
            },
        }));
        Ok(out)
    }

    /// Writes the benchmark manifest (images copied) into `out`.
    pub fn export(&self, out: &Path, opts: ExportOptions) -> Result<(Manifest, ExportSummary), ReviewError> {
        let state = self.state();
        let manifest = self.export_manifest(opts)?;
        let saved = manifest.save(out, opts.overwrite)?;
        let stats = saved.stats();
        let summary = ExportSummary {
            path: out.to_path_buf(),
            samples: stats.samples,
            provenance: stats.provenance_histogram.clone(),
            corrected: state.tasks.iter().filter(|t| t.is_exportable() && t.correction.is_some()).count(),
            rejected: state.count(Status::Rejected),
            skipped_unfinished: state.count(Status::Pending) + state.count(Status::InReview),
            manifest_digest: saved.digest(),
        };
        tracing::info!(samples = summary.samples, path = %out.display(), "exported benchmark");
        Ok((saved, summary))
    }
}

fn valid_reviewer(r: &str) -> Result<&str, ReviewError> {
    let r = r.trim();
    if r.is_empty() || r.chars().count() > 128 || r.chars().any(char::is_control) {
        return Err(ReviewError::InvalidReviewer);
    }
    Ok(r)
}

fn load_snapshot(dir: &Path) -> Option<State> {
    let raw = fs::read(dir.join(SNAPSHOT_FILE)).ok()?;
    match serde_json::from_slice::<State>(&raw) {
        Ok(mut s) => {
            s.reindex();
            Some(s)
        }
        Err(e) => {
            tracing::warn!(error = %e, "ignoring unreadable snapshot");
            None
        }
    }
}

fn write_snapshot(dir: &Path, state: &State) -> Result<(), ReviewError> {
    let body = serde_json::to_vec(state).expect("state serializes");
    write_atomic(&dir.join(SNAPSHOT_FILE), &body)?;
    Ok(())
}
