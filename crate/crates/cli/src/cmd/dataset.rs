use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Subcommand;
use darijakit_core::dataset::{
    ingest_real, merge, split, verify, MixClass, Provenance, Split, TargetMix, TranscriptSource,
};
use serde_json::json;

use crate::cmd::{echo, emit, load_manifest, setup, setup_plain};
use crate::config::{normalize_weights, parse_weights};
use crate::error::{CliError, CliResult};
use crate::Common;

#[derive(Debug, Subcommand)]
pub enum DatasetCmd {
    /// Assign train/validation/bench splits with a seeded shuffle.
    Split {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Split weights, e.g. `train=26162,bench=3930`. Defaults to
        /// `dataset.ratios` in the config, else that 26162:3930 ratio.
        #[arg(long)]
        ratios: Option<String>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Union of two manifests, optionally downsampled to a target mix.
    Merge {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Class weights, e.g. `synthetic=86,real=14`.
        #[arg(long)]
        mix: Option<String>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Check image hashes, boxes and stored stats. Exits 1 on any finding.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Print recomputed statistics.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Build a manifest from real images with paired transcripts.
    Ingest {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        provenance: String,
        /// A directory of `<stem>.txt` files or a `.jsonl` file of
        /// `{"image", "text"}` rows. Defaults to `--dir`.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Keep images without a transcript, with empty ground truth.
        #[arg(long)]
        allow_unlabeled: bool,
        #[arg(long)]
        overwrite: bool,
    },
}

const DEFAULT_RATIOS: [(Split, f64); 2] = [(Split::Train, 26162.0), (Split::Validation, 3930.0)];

pub fn run(cmd: DatasetCmd, log: Option<&str>) -> CliResult {
    match cmd {
        DatasetCmd::Split { common, manifest, out, ratios, overwrite } => {
            let (cfg, eff) = setup(&common, log)?;
            let weights: BTreeMap<Split, f64> = match (&ratios, cfg.dataset.as_ref().map(|d| &d.ratios)) {
                (Some(s), _) => parse_weights(s)?,
                (None, Some(r)) if !r.is_empty() => normalize_weights(r.clone())?,
                _ => normalize_weights(DEFAULT_RATIOS.into_iter().collect())?,
            };
            let seed = eff.seed.unwrap_or(0);
            let source = load_manifest(&manifest)?;
            let mut m = split(&source, &weights, seed)?;
            m.generator = Some(echo(
                "dataset split",
                &eff,
                &cfg,
                json!({ "manifest": manifest, "ratios": weights, "seed": seed, "source_digest": source.digest() }),
            ));
            let saved = m.save(&out, overwrite)?;
            emit(&json!({ "out": out, "splits": saved.stats().splits, "manifest_digest": saved.digest() }));
        }
        DatasetCmd::Merge { common, a, b, out, mix, overwrite } => {
            let (cfg, eff) = setup(&common, log)?;
            let target: Option<TargetMix> = match (&mix, cfg.dataset.as_ref().and_then(|d| d.target_mix.clone())) {
                (Some(s), _) => Some(parse_weights::<MixClass>(s)?),
                (None, Some(t)) => Some(normalize_weights(t)?),
                _ => None,
            };
            let seed = eff.seed.unwrap_or(0);
            let (ma, mb) = (load_manifest(&a)?, load_manifest(&b)?);
            let mut m = merge(&ma, &mb, target.as_ref(), seed)?;
            m.generator = Some(echo(
                "dataset merge",
                &eff,
                &cfg,
                json!({ "a": a, "b": b, "target_mix": target, "seed": seed }),
            ));
            let saved = m.save(&out, overwrite)?;
            emit(&json!({ "out": out, "stats": saved.stats(), "manifest_digest": saved.digest() }));
        }
        DatasetCmd::Verify { manifest } => {
            setup_plain(log)?;
            let m = load_manifest(&manifest)?;
            let diagnostics = verify(&m);
            let mut out = std::io::stdout().lock();
            for d in &diagnostics {
                let _ = writeln!(out, "{}", serde_json::to_string(d).expect("diagnostic serializes"));
            }
            if !diagnostics.is_empty() {
                return Err(CliError::failed(format!("{} problem(s) in {}", diagnostics.len(), manifest.display())));
            }
            eprintln!("{}: {} samples, no problems", manifest.display(), m.len());
        }
        DatasetCmd::Stats { manifest } => {
            setup_plain(log)?;
            let m = load_manifest(&manifest)?;
            emit(&json!({ "stats": m.stats(), "manifest_digest": m.digest() }));
        }
        DatasetCmd::Ingest { dir, provenance, transcripts, out, allow_unlabeled, overwrite } => {
            setup_plain(log)?;
            let prov: Provenance = serde_json::from_value(json!(provenance))
                .map_err(|_| CliError::usage(format!("unknown provenance `{provenance}`")))?;
            let source = match transcripts {
                Some(p) if p.is_file() => TranscriptSource::Jsonl(p),
                Some(p) => TranscriptSource::Dir(p),
                None => TranscriptSource::Dir(dir.clone()),
            };
            let outcome = ingest_real(&dir, prov, &source, allow_unlabeled)?;
            for d in &outcome.diagnostics {
                eprintln!("warning: {d}");
            }
            let mut m = outcome.manifest;
            m.generator = Some(json!({
                "tool_version": darijakit_core::TOOL_VERSION,
                "command": "dataset ingest",
                "args": { "dir": dir, "provenance": prov, "allow_unlabeled": allow_unlabeled },
            }));
            let saved = m.save(&out, overwrite)?;
            emit(&json!({
                "out": out,
                "samples": saved.len(),
                "skipped": outcome.diagnostics.len(),
                "manifest_digest": saved.digest(),
            }));
        }
    }
    Ok(())
}
