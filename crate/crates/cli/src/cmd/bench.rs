use std::path::{Path, PathBuf};

use clap::Subcommand;
use darijakit_bench::{compare, import_external_benchmark, run_benchmark, AdapterSpec, BenchReport, ImportFormat, RunOptions};
use darijakit_core::textnorm::NormalizationConfig;
use serde_json::json;

use crate::cmd::{echo, emit, load_manifest, setup, setup_plain};
use crate::config::load_norm;
use crate::error::{CliError, CliResult};
use crate::Common;

#[derive(Debug, Subcommand)]
pub enum BenchCmd {
    /// Transcribe the bench split with one model and score it.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        /// `echo`, `noisy:p=0.1,seed=7`, `subprocess:<command>`,
        /// `http:<url>` or `@adapter.toml`. Defaults to `bench.adapter`.
        #[arg(long)]
        adapter: Option<String>,
        /// Normalization config (.toml or .json). Defaults to `[norm]`.
        #[arg(long)]
        norm: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        benchmark_id: Option<String>,
        /// Skip the image hash and stats check.
        #[arg(long)]
        skip_verify: bool,
    },
    /// Rank reports on the same benchmark.
    Compare {
        /// Glob of report files; `*.timing.json` sidecars are ignored.
        #[arg(long)]
        reports: String,
        /// One or more outputs; the format follows the extension
        /// (csv, json, md, svg).
        #[arg(long, required = true, num_args = 1..)]
        out: Vec<PathBuf>,
    },
    /// Convert a third-party benchmark folder into a manifest.
    Import {
        #[arg(long)]
        dir: PathBuf,
        /// `images+txt` or `images+jsonl`.
        #[arg(long)]
        format: ImportFormat,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        overwrite: bool,
    },
}

fn is_timing(p: &Path) -> bool {
    p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".timing.json"))
}

pub fn run(cmd: BenchCmd, log: Option<&str>) -> CliResult {
    match cmd {
        BenchCmd::Run { common, manifest, adapter, norm, out, benchmark_id, skip_verify } => {
            let (cfg, eff) = setup(&common, log)?;
            let bench_cfg = cfg.bench.clone().unwrap_or_default();
            let spec = match (&adapter, bench_cfg.adapter) {
                (Some(s), _) => AdapterSpec::parse(s).map_err(CliError::usage)?,
                (None, Some(spec)) => spec,
                (None, None) => return Err(CliError::usage("no adapter: pass --adapter or set bench.adapter")),
            };
            let normalization: NormalizationConfig = match &norm {
                Some(p) => load_norm(p)?,
                None => cfg.norm.clone().unwrap_or_default(),
            };
            let m = load_manifest(&manifest)?;
            let opts = RunOptions {
                benchmark_id: benchmark_id.or(bench_cfg.benchmark_id),
                concurrency: eff.jobs.unwrap_or(4).max(1),
                skip_verify,
                config: Some(echo(
                    "bench run",
                    &eff,
                    &cfg,
                    json!({ "adapter": adapter, "norm": norm, "skip_verify": skip_verify }),
                )),
            };
            let (report, timing) = run_benchmark(&m, &spec, &normalization, &opts)?;
            report.save(&out, Some(&timing))?;
            emit(&json!({
                "out": out,
                "model_id": report.model_id,
                "aggregate": report.aggregate,
                "excluded": report.excluded.len(),
            }));
        }
        BenchCmd::Compare { reports, out } => {
            setup_plain(log)?;
            let paths = glob::glob(&reports).map_err(|e| CliError::usage(format!("--reports `{reports}`: {e}")))?;
            let mut files: Vec<PathBuf> = paths.filter_map(Result::ok).filter(|p| p.is_file() && !is_timing(p)).collect();
            files.sort();
            let loaded = files.iter().map(|p| BenchReport::load(p)).collect::<Result<Vec<_>, _>>()?;
            let board = compare(&loaded)?;
            for path in &out {
                board.write(path)?;
            }
            emit(&board.rows);
        }
        BenchCmd::Import { dir, format, out, overwrite } => {
            setup_plain(log)?;
            let mut m = import_external_benchmark(&dir, format)?;
            m.generator = Some(json!({
                "tool_version": darijakit_core::TOOL_VERSION,
                "command": "bench import",
                "args": { "dir": dir, "format": format },
            }));
            let saved = m.save(&out, overwrite)?;
            emit(&json!({ "out": out, "samples": saved.len(), "manifest_digest": saved.digest() }));
        }
    }
    Ok(())
}
