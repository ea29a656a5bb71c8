use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Subcommand;
use darijakit_review::api::{serve, ApiConfig};
use darijakit_review::{read_label_rows, ExportOptions, Project};
use serde_json::json;

use crate::cmd::{emit, load_manifest, setup_plain};
use crate::error::{CliError, CliResult};

#[derive(Debug, Subcommand)]
pub enum ReviewCmd {
    /// Start a project with one task per pseudo-label.
    Create {
        #[arg(long)]
        manifest: PathBuf,
        /// Labels JSONL (`sample_id`, `text` per row).
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        project: PathBuf,
    },
    /// Serve the review HTTP API (and optionally the UI build).
    Serve {
        #[arg(long)]
        project: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Shared token required on every API request.
        #[arg(long, env = "DARIJAKIT_REVIEW_TOKEN", hide_env_values = true)]
        token: Option<String>,
        /// Static UI files served at `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
        /// Target of `POST /api/export`; defaults to `<project>/export`.
        #[arg(long)]
        export_dir: Option<PathBuf>,
    },
    /// Write approved and corrected tasks as a bench manifest.
    Export {
        #[arg(long)]
        project: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Export even with pending or in-review tasks.
        #[arg(long)]
        partial: bool,
        #[arg(long)]
        overwrite: bool,
    },
    /// Print task counts.
    Progress {
        #[arg(long)]
        project: PathBuf,
    },
}

pub fn run(cmd: ReviewCmd, log: Option<&str>) -> CliResult {
    setup_plain(log)?;
    match cmd {
        ReviewCmd::Create { manifest, labels, project } => {
            let m = load_manifest(&manifest)?;
            let rows = read_label_rows(&labels)?;
            let p = Project::create(&project, &m, &rows)?;
            emit(&json!({ "project": project, "tasks": p.progress().total }));
        }
        ReviewCmd::Serve { project, port, host, token, assets, export_dir } => {
            let p = Arc::new(Project::open(&project)?);
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| CliError::usage(format!("address {host}:{port}: {e}")))?;
            let cfg = ApiConfig { token: token.filter(|t| !t.is_empty()), assets, export_dir };
            let rt = tokio::runtime::Runtime::new().map_err(CliError::failed)?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|e| CliError::failed(format!("binding {addr}: {e}")))?;
                let bound = listener.local_addr().map_err(CliError::failed)?;
                eprintln!("listening on http://{bound}");
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                serve(p, cfg, listener, shutdown).await.map_err(CliError::failed)
            })?;
        }
        ReviewCmd::Export { project, out, partial, overwrite } => {
            let p = Project::open(&project)?;
            let (_, summary) = p.export(&out, ExportOptions { partial, overwrite })?;
            emit(&summary);
        }
        ReviewCmd::Progress { project } => {
            let p = Project::open(&project)?;
            emit(&p.progress());
        }
    }
    Ok(())
}
