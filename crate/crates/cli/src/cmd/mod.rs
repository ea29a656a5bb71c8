pub mod bench;
pub mod dataset;
pub mod forge;
pub mod pseudolabel;
pub mod review;

use std::io::{IsTerminal, Write};
use std::path::Path;

use serde::Serialize;
use tracing_subscriber::EnvFilter;

use crate::config::{effective, Effective, RunConfig};
use crate::error::{CliError, CliResult};
use crate::Common;

/// Loads the config, applies overrides and starts logging to stderr.
pub fn setup(common: &Common, log: Option<&str>) -> CliResult<(RunConfig, Effective)> {
    let cfg = RunConfig::load_opt(common.config.as_deref())?;
    let eff = effective(&cfg, common.seed, common.jobs, log)?;
    init_logging(&eff.log)?;
    Ok((cfg, eff))
}

pub fn setup_plain(log: Option<&str>) -> CliResult<Effective> {
    let eff = effective(&RunConfig::default(), None, None, log)?;
    init_logging(&eff.log)?;
    Ok(eff)
}

fn init_logging(filter: &str) -> CliResult {
    let filter = EnvFilter::try_new(filter).map_err(|e| CliError::usage(format!("log filter `{filter}`: {e}")))?;
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .try_init();
    Ok(())
}

/// Pretty JSON on stdout.
pub fn emit(value: &impl Serialize) {
    let mut out = std::io::stdout().lock();
    // a closed pipe (`| head`) is not an error worth reporting
    let body = serde_json::to_string_pretty(value).expect("output serializes");
    let _ = writeln!(out, "{body}");
}

/// Provenance block embedded in artifacts.
pub fn echo(command: &str, eff: &Effective, cfg: &RunConfig, extra: serde_json::Value) -> serde_json::Value {
    serde_json::json!({
        "tool_version": darijakit_core::TOOL_VERSION,
        "command": command,
        "seed": eff.seed,
        "config": cfg,
        "args": extra,
    })
}

pub fn load_manifest(dir: &Path) -> CliResult<darijakit_core::dataset::Manifest> {
    darijakit_core::dataset::Manifest::load(dir).map_err(|e| CliError::failed(format!("loading manifest {}: {e}", dir.display())))
}
