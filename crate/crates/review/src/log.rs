//! Append-only JSONL event log and the state it replays into.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_err, ReviewError};
use crate::task::{apply, check, AnnotationTask, Status, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub task_id: String,
    #[serde(flatten)]
    pub transition: Transition,
    /// Unix milliseconds.
    pub timestamp: u64,
}

/// Task states after replaying entries `1..=seq`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct State {
    pub seq: u64,
    pub tasks: Vec<AnnotationTask>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq && self.tasks == other.tasks
    }
}

impl State {
    pub fn reindex(&mut self) {
        self.index = self.tasks.iter().enumerate().map(|(i, t)| (t.task_id.clone(), i)).collect();
    }

    pub fn get(&self, task_id: &str) -> Option<&AnnotationTask> {
        self.index.get(task_id).map(|&i| &self.tasks[i])
    }

    pub fn count(&self, status: Status) -> usize {
        self.tasks.iter().filter(|t| t.status == status).count()
    }

    /// Validates `entry` against the current state without applying it.
    pub fn check(&self, entry: &LogEntry) -> Result<(), String> {
        if entry.seq != self.seq + 1 {
            return Err(format!("sequence {} follows {}", entry.seq, self.seq));
        }
        match (&entry.transition, self.get(&entry.task_id)) {
            (Transition::Create { .. }, None) => Ok(()),
            (Transition::Create { .. }, Some(_)) => Err(format!("task {} created twice", entry.task_id)),
            (_, None) => Err(format!("unknown task {}", entry.task_id)),
            (t, Some(task)) => check(task, t).map_err(|e| e.to_string()),
        }
    }

    pub fn apply(&mut self, entry: &LogEntry) -> Result<(), String> {
        self.check(entry)?;
        self.seq = entry.seq;
        match &entry.transition {
            Transition::Create { sample_id, provenance, pseudo_label } => {
                self.index.insert(entry.task_id.clone(), self.tasks.len());
                self.tasks.push(AnnotationTask {
                    task_id: entry.task_id.clone(),
                    sample_id: sample_id.clone(),
                    provenance: *provenance,
                    pseudo_label: pseudo_label.clone(),
                    status: Status::Pending,
                    correction: None,
                    reviewer: None,
                    reject_reason: None,
                    updated_at: entry.timestamp,
                });
            }
            t => {
                let i = self.index[&entry.task_id];
                apply(&mut self.tasks[i], t, entry.timestamp);
            }
        }
        Ok(())
    }
}

pub const LOG_FILE_NAME: &str = "events.jsonl";

pub struct EventLog {
    path: PathBuf,
    file: File,
    len: u64,
}

impl EventLog {
    /// Opens (creating if needed) and reads every complete entry. A torn
    /// final line, left by a crash mid-append, is cut off; it was never
    /// acknowledged.
    pub fn open(path: &Path) -> Result<(Self, Vec<LogEntry>), ReviewError> {
        let raw = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io_err(path)(e)),
        };
        let complete = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let mut entries = Vec::new();
        for (i, line) in raw[..complete].split(|&b| b == b'\n').enumerate() {
            if line.is_empty() {
                continue;
            }
            let entry: LogEntry = serde_json::from_slice(line).map_err(|e| ReviewError::Corrupt {
                path: path.to_path_buf(),
                line: i + 1,
                detail: e.to_string(),
            })?;
            entries.push(entry);
        }
        let mut file = OpenOptions::new().create(true).read(true).write(true).truncate(false).open(path).map_err(io_err(path))?;
        if complete < raw.len() {
            tracing::warn!(path = %path.display(), bytes = raw.len() - complete, "dropping torn log tail");
            file.set_len(complete as u64).map_err(io_err(path))?;
            file.sync_data().map_err(io_err(path))?;
        }
        file.seek(SeekFrom::Start(complete as u64)).map_err(io_err(path))?;
        Ok((Self { path: path.to_path_buf(), file, len: complete as u64 }, entries))
    }

    /// Writes and fsyncs. On failure the file is cut back so a later
    /// append never lands after a partial line.
    pub fn append(&mut self, entries: &[LogEntry]) -> Result<(), ReviewError> {
        let mut buf = Vec::new();
        for e in entries {
            serde_json::to_writer(&mut buf, e).expect("log entry serializes");
            buf.push(b'\n');
        }
        let written = self.file.write_all(&buf).and_then(|_| self.file.sync_data());
        if let Err(e) = written {
            let _ = self.file.set_len(self.len);
            let _ = self.file.seek(SeekFrom::Start(self.len));
            return Err(io_err(&self.path)(e));
        }
        self.len += buf.len() as u64;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Replays `entries` on top of `state`.
pub fn replay(mut state: State, entries: &[LogEntry], path: &Path) -> Result<State, ReviewError> {
    for (i, e) in entries.iter().enumerate() {
        if e.seq <= state.seq {
            continue;
        }
        state.apply(e).map_err(|detail| ReviewError::Corrupt { path: path.to_path_buf(), line: i + 1, detail })?;
    }
    Ok(state)
}
