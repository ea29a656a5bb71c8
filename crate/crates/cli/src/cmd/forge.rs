use std::path::PathBuf;

use clap::Subcommand;
use darijakit_forge::{generate_dataset, validate_config, Forge, ForgeError, GenerateOptions};
use serde_json::json;

use crate::cmd::{emit, setup};
use crate::error::{CliError, CliResult};
use crate::Common;

#[derive(Debug, Subcommand)]
pub enum ForgeCmd {
    /// Render synthetic samples into a manifest directory.
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `forge.output.count`.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        overwrite: bool,
    },
}

pub fn run(cmd: ForgeCmd, log: Option<&str>) -> CliResult {
    let ForgeCmd::Generate { common, out, count, overwrite } = cmd;
    if common.config.is_none() {
        return Err(CliError::usage("forge generate needs --config"));
    }
    let (cfg, eff) = setup(&common, log)?;
    let mut forge_cfg = cfg.forge.clone().ok_or_else(|| CliError::usage("config has no [forge] section"))?;
    if let Some(seed) = eff.seed {
        forge_cfg.master_seed = seed;
    }
    let problems = validate_config(&forge_cfg);
    if !problems.is_empty() {
        return Err(CliError::usage(format!("invalid forge config:\n  {}", problems.join("\n  "))));
    }
    let forge = Forge::new(forge_cfg).map_err(|e| match e {
        ForgeError::InvalidConfig(_) => CliError::usage(e),
        _ => CliError::failed(e),
    })?;
    let opts = GenerateOptions { count, jobs: eff.jobs.unwrap_or(0), overwrite };
    let manifest = generate_dataset(&forge, &out, &opts).map_err(CliError::failed)?;
    emit(&json!({
        "out": out,
        "samples": manifest.len(),
        "seed": forge.config().master_seed,
        "manifest_digest": manifest.digest(),
    }));
    Ok(())
}
