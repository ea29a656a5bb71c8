use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::{Provenance, SampleRecord};
use super::DatasetError;
use crate::digest::sha256_hex;

pub const SCHEMA_VERSION: u32 = 1;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const STATS_FILE: &str = "stats.json";
pub const SPLITS_FILE: &str = "splits.json";
pub const IMAGES_DIR: &str = "images";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Bench,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Bench];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Bench => "bench",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown split {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ManifestStats {
    pub samples: usize,
    /// Whitespace-delimited tokens of the raw ground truth.
    pub total_words: usize,
    pub provenance_histogram: BTreeMap<Provenance, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub splits: BTreeMap<Split, usize>,
}

/// Layout of `stats.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub stats: ManifestStats,
    /// Tool version, effective configuration and seed of the command that
    /// wrote the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
}

/// An ordered collection of sample records with split labels.
///
/// In memory every `image_path` is a full path; on disk paths are relative
/// to the manifest directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub root: PathBuf,
    pub records: Vec<SampleRecord>,
    pub splits: BTreeMap<String, Split>,
    pub schema_version: u32,
    pub generator: Option<serde_json::Value>,
    /// Stats as read from disk, kept so `verify` can compare them against a
    /// recomputation.
    pub stored_stats: Option<ManifestStats>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Manifest {
    pub fn new(root: impl Into<PathBuf>, records: Vec<SampleRecord>) -> Self {
        Self {
            root: root.into(),
            records,
            splits: BTreeMap::new(),
            schema_version: SCHEMA_VERSION,
            generator: None,
            stored_stats: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, sample_id: &str) -> Option<&SampleRecord> {
        self.records.iter().find(|r| r.sample_id == sample_id)
    }

    pub fn stats(&self) -> ManifestStats {
        let mut histogram = BTreeMap::new();
        for r in &self.records {
            *histogram.entry(r.provenance).or_insert(0) += 1;
        }
        let mut splits = BTreeMap::new();
        for split in self.splits.values() {
            *splits.entry(*split).or_insert(0) += 1;
        }
        ManifestStats {
            samples: self.records.len(),
            total_words: self.records.iter().map(SampleRecord::word_count).sum(),
            provenance_histogram: histogram,
            splits,
        }
    }

    pub fn ensure_unique_ids(&self) -> Result<(), DatasetError> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.sample_id.as_str()) {
                return Err(DatasetError::DuplicateSampleId(r.sample_id.clone()));
            }
        }
        Ok(())
    }

    /// Records assigned to `split`, in manifest order.
    pub fn split_records(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.records
            .iter()
            .filter(move |r| self.splits.get(&r.sample_id) == Some(&split))
    }

    /// The JSONL body with image paths relative to `base`.
    pub fn to_jsonl(&self, base: &Path) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.records {
            let mut rec = r.clone();
            rec.image_path = relative_to(&r.image_path, base);
            serde_json::to_writer(&mut out, &rec).expect("record serializes");
            out.push(b'\n');
        }
        out
    }

    /// SHA-256 of the JSONL body relative to the manifest root; pins the
    /// exact content of a benchmark.
    pub fn digest(&self) -> String {
        sha256_hex(self.to_jsonl(&self.root))
    }

    pub fn load(dir: &Path) -> Result<Self, DatasetError> {
        let stats_path = dir.join(STATS_FILE);
        let (schema_version, stored_stats, generator) = if stats_path.exists() {
            let raw = fs::read_to_string(&stats_path).map_err(io_err(&stats_path))?;
            let value: serde_json::Value =
                serde_json::from_str(&raw).map_err(|source| DatasetError::Json {
                    path: stats_path.clone(),
                    line: 0,
                    source,
                })?;
            let version = value
                .get("schema_version")
                .and_then(|v| v.as_u64())
                .unwrap_or(u64::from(SCHEMA_VERSION)) as u32;
            if version > SCHEMA_VERSION {
                return Err(DatasetError::UnsupportedSchema {
                    found: version,
                    supported: SCHEMA_VERSION,
                });
            }
            let file: StatsFile =
                serde_json::from_value(value).map_err(|source| DatasetError::Json {
                    path: stats_path.clone(),
                    line: 0,
                    source,
                })?;
            (file.schema_version, Some(file.stats), file.generator)
        } else {
            (SCHEMA_VERSION, None, None)
        };

        let manifest_path = dir.join(MANIFEST_FILE);
        let file = fs::File::open(&manifest_path).map_err(io_err(&manifest_path))?;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(&manifest_path))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut rec: SampleRecord =
                serde_json::from_str(&line).map_err(|source| DatasetError::Json {
                    path: manifest_path.clone(),
                    line: i + 1,
                    source,
                })?;
            rec.image_path = dir.join(&rec.image_path);
            records.push(rec);
        }

        let splits_path = dir.join(SPLITS_FILE);
        let splits = if splits_path.exists() {
            let raw = fs::read_to_string(&splits_path).map_err(io_err(&splits_path))?;
            serde_json::from_str(&raw).map_err(|source| DatasetError::Json {
                path: splits_path.clone(),
                line: 0,
                source,
            })?
        } else {
            BTreeMap::new()
        };

        Ok(Self {
            root: dir.to_path_buf(),
            records,
            splits,
            schema_version,
            generator,
            stored_stats,
        })
    }

    /// Writes `manifest.jsonl`, `stats.json` and (when non-empty)
    /// `splits.json` into `dir`. Images living outside `dir` are copied to
    /// `dir/images/`. The returned manifest is rooted at `dir`.
    pub fn save(&self, dir: &Path, overwrite: bool) -> Result<Manifest, DatasetError> {
        let manifest_path = dir.join(MANIFEST_FILE);
        if manifest_path.exists() && !overwrite {
            return Err(DatasetError::OutputExists(manifest_path));
        }
        self.ensure_unique_ids()?;
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let canonical_dir = dir.canonicalize().map_err(io_err(dir))?;

        let mut saved = self.clone();
        saved.root = dir.to_path_buf();
        for rec in &mut saved.records {
            let inside = rec
                .image_path
                .canonicalize()
                .ok()
                .is_some_and(|p| p.starts_with(&canonical_dir));
            if inside {
                let canonical = rec.image_path.canonicalize().map_err(io_err(&rec.image_path))?;
                let rel = canonical.strip_prefix(&canonical_dir).unwrap_or(&canonical);
                rec.image_path = dir.join(rel);
                continue;
            }
            let ext = rec
                .image_path
                .extension()
                .and_then(|e| e.to_str())
                .unwrap_or("png")
                .to_ascii_lowercase();
            let images = dir.join(IMAGES_DIR);
            fs::create_dir_all(&images).map_err(io_err(&images))?;
            let target = images.join(format!("{}.{ext}", rec.sample_id));
            fs::copy(&rec.image_path, &target).map_err(io_err(&rec.image_path))?;
            rec.image_path = target;
        }

        let stats = saved.stats();
        write_atomic(&manifest_path, &saved.to_jsonl(dir))?;
        let stats_file = StatsFile {
            schema_version: SCHEMA_VERSION,
            stats: stats.clone(),
            generator: saved.generator.clone(),
        };
        let mut stats_json = serde_json::to_vec_pretty(&stats_file).expect("stats serialize");
        stats_json.push(b'\n');
        write_atomic(&dir.join(STATS_FILE), &stats_json)?;

        let splits_path = dir.join(SPLITS_FILE);
        if saved.splits.is_empty() {
            if splits_path.exists() {
                fs::remove_file(&splits_path).map_err(io_err(&splits_path))?;
            }
        } else {
            let mut json = serde_json::to_vec_pretty(&saved.splits).expect("splits serialize");
            json.push(b'\n');
            write_atomic(&splits_path, &json)?;
        }
        saved.stored_stats = Some(stats);
        saved.schema_version = SCHEMA_VERSION;
        Ok(saved)
    }
}

/// `path` relative to `base` when it lies underneath it, else unchanged.
pub fn relative_to(path: &Path, base: &Path) -> PathBuf {
    if let Ok(rel) = path.strip_prefix(base) {
        return rel.to_path_buf();
    }
    match (path.canonicalize(), base.canonicalize()) {
        (Ok(p), Ok(b)) => p.strip_prefix(&b).map(Path::to_path_buf).unwrap_or(p),
        _ => path.to_path_buf(),
    }
}

/// Write to a sibling temp file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}
