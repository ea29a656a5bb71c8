use std::path::{Path, PathBuf};

use clap::Subcommand;
use darijakit_core::dataset::{write_atomic, Split};
use darijakit_pseudolabel::{apply_labels, label_batch, read_labels, Labeler, Secret};
use serde_json::json;

use crate::cmd::{echo, emit, load_manifest, setup};
use crate::error::{CliError, CliResult};
use crate::Common;

#[derive(Debug, Subcommand)]
pub enum PseudolabelCmd {
    /// Label every record with empty ground truth. Reruns resume.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        /// Labels JSONL; a `<stem>.failures.json` report and a
        /// `<stem>.run.json` config echo are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Copy pseudo-labels into ground truth.
    Apply {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Only fill records on this split.
        #[arg(long)]
        split: Option<Split>,
        /// Required: acknowledges the labels have not been reviewed.
        #[arg(long)]
        trust_pseudolabels: bool,
        #[arg(long)]
        overwrite: bool,
    },
}

fn run_echo_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("labels");
    out.with_file_name(format!("{stem}.run.json"))
}

pub fn run(cmd: PseudolabelCmd, log: Option<&str>) -> CliResult {
    match cmd {
        PseudolabelCmd::Run { common, manifest, out } => {
            let (cfg, eff) = setup(&common, log)?;
            let mut labeler_cfg = cfg.labeler.clone().unwrap_or_default();
            if let Some(j) = eff.jobs {
                labeler_cfg.concurrency = j.max(1);
            }
            let problems = labeler_cfg.validate();
            if !problems.is_empty() {
                return Err(CliError::usage(format!("invalid labeler config:\n  {}", problems.join("\n  "))));
            }
            let secret = Secret::from_env(&labeler_cfg.credential_env).ok_or_else(|| {
                CliError::usage(format!("no API key: set the {} environment variable", labeler_cfg.credential_env))
            })?;
            let m = load_manifest(&manifest)?;
            let labeler = Labeler::new(labeler_cfg.clone(), secret);
            let result = label_batch(&m, &labeler, &out);

            let mut echoed = cfg.clone();
            echoed.labeler = Some(labeler_cfg);
            let mut body = serde_json::to_vec_pretty(&echo(
                "pseudolabel run",
                &eff,
                &echoed,
                json!({ "manifest": manifest, "manifest_digest": m.digest() }),
            ))
            .expect("echo serializes");
            body.push(b'\n');
            write_atomic(&run_echo_path(&out), &body)?;

            let outcome = result?;
            emit(&json!({
                "out": out,
                "labeled": outcome.labels.len(),
                "resumed": outcome.resumed,
                "failed": outcome.failures.len(),
                "report": outcome.report_path,
                "requests": labeler.requests_sent(),
            }));
        }
        PseudolabelCmd::Apply { common, manifest, labels, out, split, trust_pseudolabels, overwrite } => {
            let (cfg, eff) = setup(&common, log)?;
            let m = load_manifest(&manifest)?;
            let rows = read_labels(&labels)?;
            let (mut applied, n) = apply_labels(&m, &rows, trust_pseudolabels, split)?;
            applied.generator = Some(echo(
                "pseudolabel apply",
                &eff,
                &cfg,
                json!({ "manifest": manifest, "labels": labels, "split": split, "trust_pseudolabels": true }),
            ));
            let saved = applied.save(&out, overwrite)?;
            emit(&json!({ "out": out, "applied": n, "manifest_digest": saved.digest() }));
        }
    }
    Ok(())
}
