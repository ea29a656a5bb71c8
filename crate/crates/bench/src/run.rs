//! Running an adapter over a benchmark manifest.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use darijakit_core::dataset::{verify, write_atomic, Manifest, SampleRecord, Split};
use darijakit_core::metrics::{aggregate, score, AggregateScore, ScoreCard};
use darijakit_core::textnorm::NormalizationConfig;
use darijakit_core::TOOL_VERSION;
use serde::{Deserialize, Serialize};

use crate::adapter::{AdapterError, AdapterSpec, ModelAdapter, SampleInput};
use crate::BenchError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkRef {
    pub id: String,
    pub manifest_digest: String,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Timeout,
    AdapterError,
    /// Nothing left to score after normalization.
    EmptyReference,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excluded {
    pub sample_id: String,
    pub reason: ExclusionReason,
    pub detail: String,
}

/// Deterministic part of a run. Timing lives in [`RunTiming`] so that
/// reruns produce byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub benchmark: BenchmarkRef,
    pub model_id: String,
    pub adapter: AdapterSpec,
    pub normalization: NormalizationConfig,
    /// `None` when every sample was excluded.
    pub aggregate: Option<AggregateScore>,
    pub cards: Vec<ScoreCard>,
    pub excluded: Vec<Excluded>,
    /// Caller-supplied effective configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl BenchReport {
    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("report serializes");
        v.push(b'\n');
        v
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let raw = std::fs::read(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_slice(&raw).map_err(|source| BenchError::Json { path: path.to_path_buf(), source })
    }

    /// Writes the report and its `.timing.json` sidecar.
    pub fn save(&self, path: &Path, timing: Option<&RunTiming>) -> Result<(), BenchError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|source| BenchError::Io { path: parent.to_path_buf(), source })?;
        }
        write_atomic(path, &self.to_json())?;
        if let Some(t) = timing {
            let mut v = serde_json::to_vec_pretty(t).expect("timing serializes");
            v.push(b'\n');
            write_atomic(&timing_path(path), &v)?;
        }
        Ok(())
    }
}

/// `report.json` -> `report.timing.json`.
pub fn timing_path(report: &Path) -> PathBuf {
    let stem = report.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    report.with_file_name(format!("{stem}.timing.json"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub wall_ms: u64,
    pub per_sample_ms_mean: f64,
    pub per_sample_ms_p50: u64,
    pub per_sample_ms_p90: u64,
    pub per_sample_ms_max: u64,
    pub concurrency: usize,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Defaults to the manifest directory name.
    pub benchmark_id: Option<String>,
    pub concurrency: usize,
    /// Skip the integrity check of image files and stats.
    pub skip_verify: bool,
    pub config: Option<serde_json::Value>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { benchmark_id: None, concurrency: 4, skip_verify: false, config: None }
    }
}

/// Records on the bench split; a manifest without split assignments is
/// taken whole.
pub fn bench_records(manifest: &Manifest) -> Vec<&SampleRecord> {
    if manifest.splits.is_empty() {
        manifest.records.iter().collect()
    } else {
        manifest.split_records(Split::Bench).collect()
    }
}

enum Outcome {
    Scored(ScoreCard),
    Excluded(Excluded),
}

fn attempt(adapter: &dyn ModelAdapter, spec: &AdapterSpec, rec: &SampleRecord) -> Result<String, AdapterError> {
    let input = SampleInput { sample_id: &rec.sample_id, image_path: &rec.image_path, ground_truth: &rec.ground_truth };
    let mut tries = 0;
    loop {
        match adapter.transcribe(&input) {
            Err(e @ (AdapterError::Failed(_) | AdapterError::Timeout(_))) if tries < spec.max_retries => {
                tries += 1;
                tracing::debug!(sample_id = %rec.sample_id, error = %e, "retrying sample");
            }
            other => return other,
        }
    }
}

pub fn run_benchmark(
    manifest: &Manifest,
    spec: &AdapterSpec,
    norm: &NormalizationConfig,
    opts: &RunOptions,
) -> Result<(BenchReport, RunTiming), BenchError> {
    let adapter = spec.build().map_err(BenchError::InvalidAdapter)?;
    run_with_adapter(manifest, adapter.as_ref(), spec, norm, opts)
}

/// Like [`run_benchmark`] with a caller-built adapter; `spec` is only
/// echoed into the report and supplies retry settings.
pub fn run_with_adapter(
    manifest: &Manifest,
    adapter: &dyn ModelAdapter,
    spec: &AdapterSpec,
    norm: &NormalizationConfig,
    opts: &RunOptions,
) -> Result<(BenchReport, RunTiming), BenchError> {
    norm.validate().map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
    if !opts.skip_verify {
        let diags = verify(manifest);
        if !diags.is_empty() {
            return Err(BenchError::Unverified(diags));
        }
    }
    let records = bench_records(manifest);
    if records.is_empty() {
        return Err(BenchError::NoBenchSamples);
    }

    let started = Instant::now();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let unavailable = Mutex::new(None);
    let results: Mutex<Vec<(usize, Outcome, u64)>> = Mutex::new(Vec::with_capacity(records.len()));
    let workers = opts.concurrency.max(1).min(records.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(rec) = records.get(i) else { break };
                let t0 = Instant::now();
                let outcome = match attempt(adapter, spec, rec) {
                    Err(AdapterError::Unavailable(msg)) => {
                        abort.store(true, Ordering::SeqCst);
                        unavailable.lock().unwrap().get_or_insert(msg);
                        break;
                    }
                    Err(e) => {
                        let reason = match e {
                            AdapterError::Timeout(_) => ExclusionReason::Timeout,
                            _ => ExclusionReason::AdapterError,
                        };
                        Outcome::Excluded(Excluded { sample_id: rec.sample_id.clone(), reason, detail: e.to_string() })
                    }
                    Ok(hyp) => match score(rec.sample_id.clone(), &rec.ground_truth, &hyp, norm) {
                        Ok(card) => Outcome::Scored(card),
                        Err(e) => Outcome::Excluded(Excluded {
                            sample_id: rec.sample_id.clone(),
                            reason: ExclusionReason::EmptyReference,
                            detail: e.to_string(),
                        }),
                    },
                };
                results.lock().unwrap().push((i, outcome, t0.elapsed().as_millis() as u64));
            });
        }
    });
    if let Some(msg) = unavailable.into_inner().unwrap() {
        return Err(BenchError::AdapterUnavailable(msg));
    }

    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(i, _, _)| *i);
    let mut durations: Vec<u64> = results.iter().map(|(_, _, d)| *d).collect();
    let mut cards = Vec::new();
    let mut excluded = Vec::new();
    for (_, o, _) in results {
        match o {
            Outcome::Scored(c) => cards.push(c),
            Outcome::Excluded(e) => excluded.push(e),
        }
    }
    for e in &excluded {
        tracing::warn!(sample_id = %e.sample_id, reason = ?e.reason, detail = %e.detail, "sample excluded");
    }

    let benchmark_id = opts.benchmark_id.clone().unwrap_or_else(|| {
        manifest.root.file_name().and_then(|n| n.to_str()).unwrap_or("benchmark").to_string()
    });
    let report = BenchReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        benchmark: BenchmarkRef { id: benchmark_id, manifest_digest: manifest.digest(), samples: records.len() },
        model_id: adapter.model_id(),
        adapter: spec.clone(),
        normalization: norm.clone(),
        aggregate: aggregate(&cards).ok(),
        cards,
        excluded,
        config: opts.config.clone(),
    };

    durations.sort_unstable();
    let pct = |q: f64| durations.get(((durations.len() as f64 - 1.0) * q).round() as usize).copied().unwrap_or(0);
    let timing = RunTiming {
        wall_ms: started.elapsed().as_millis() as u64,
        per_sample_ms_mean: durations.iter().sum::<u64>() as f64 / durations.len().max(1) as f64,
        per_sample_ms_p50: pct(0.5),
        per_sample_ms_p90: pct(0.9),
        per_sample_ms_max: durations.last().copied().unwrap_or(0),
        concurrency: workers,
    };
    if let Some(a) = &report.aggregate {
        tracing::info!(model = %report.model_id, micro_cer = a.micro_cer, micro_wer = a.micro_wer, scored = a.n_samples, excluded = report.excluded.len(), "benchmark finished");
    }
    Ok((report, timing))
}
