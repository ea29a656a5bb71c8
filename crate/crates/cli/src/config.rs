//! The TOML run config shared by all subcommands, plus environment
//! overrides.
//!
//! Precedence for the global keys is: command-line flag, then
//! `DARIJAKIT_SEED` / `DARIJAKIT_JOBS` / `DARIJAKIT_LOG`, then the file.

use std::collections::BTreeMap;
use std::path::Path;

use darijakit_bench::AdapterSpec;
use darijakit_core::dataset::{Split, TargetMix};
use darijakit_core::textnorm::NormalizationConfig;
use darijakit_forge::ForgeConfig;
use darijakit_pseudolabel::LabelerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const ENV_SEED: &str = "DARIJAKIT_SEED";
pub const ENV_JOBS: &str = "DARIJAKIT_JOBS";
pub const ENV_LOG: &str = "DARIJAKIT_LOG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Log filter, e.g. `info` or `darijakit_forge=debug`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forge: Option<ForgeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeler: Option<LabelerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormalizationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Relative weights per split; normalized to fractions.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub ratios: BTreeMap<Split, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_mix: Option<TargetMix>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adapter: Option<AdapterSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benchmark_id: Option<String>,
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&raw).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if let Some(f) = &mut cfg.forge {
            f.resolve_paths(base);
        }
        if let Some(l) = &mut cfg.labeler {
            if l.cache_dir.is_relative() {
                l.cache_dir = base.join(&l.cache_dir);
            }
        }
        if let Some(AdapterSpec { command: Some(cmd), .. }) = cfg.bench.as_mut().and_then(|b| b.adapter.as_mut()) {
            // a relative program path is relative to the config, bare names go through PATH
            if let Some(prog) = cmd.first_mut().filter(|p| p.contains('/') && Path::new(p.as_str()).is_relative()) {
                *prog = base.join(&*prog).to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    pub fn load_opt(path: Option<&Path>) -> CliResult<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

fn env_parse<T: std::str::FromStr>(var: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match std::env::var(var) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map(Some).map_err(|e| CliError::usage(format!("{var}={v}: {e}")))
        }
        _ => Ok(None),
    }
}

/// Global settings after flags and environment are applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Effective {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub log: String,
}

pub fn effective(cfg: &RunConfig, seed: Option<u64>, jobs: Option<usize>, log: Option<&str>) -> CliResult<Effective> {
    let seed = match seed {
        Some(s) => Some(s),
        None => env_parse(ENV_SEED)?.or(cfg.seed),
    };
    let jobs = match jobs {
        Some(j) => Some(j),
        None => env_parse(ENV_JOBS)?.or(cfg.jobs),
    };
    let log = log
        .map(String::from)
        .or_else(|| std::env::var(ENV_LOG).ok().filter(|v| !v.trim().is_empty()))
        .or_else(|| cfg.log.clone())
        .unwrap_or_else(|| "info".into());
    Ok(Effective { seed, jobs, log })
}

/// `train=26162,bench=3930` -> fractions summing to one.
pub fn parse_weights<K: std::str::FromStr + Ord>(s: &str) -> CliResult<BTreeMap<K, f64>>
where
    K::Err: std::fmt::Display,
{
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| CliError::usage(format!("expected name=weight, got `{part}`")))?;
        let key = k.trim().parse::<K>().map_err(CliError::usage)?;
        let w: f64 = v.trim().parse().map_err(|e| CliError::usage(format!("`{part}`: {e}")))?;
        out.insert(key, w);
    }
    normalize_weights(out)
}

pub fn normalize_weights<K: Ord>(w: BTreeMap<K, f64>) -> CliResult<BTreeMap<K, f64>> {
    if w.is_empty() {
        return Err(CliError::usage("no weights given"));
    }
    if w.values().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(CliError::usage("weights must be finite and non-negative"));
    }
    let total: f64 = w.values().sum();
    if total <= 0.0 {
        return Err(CliError::usage("weights sum to zero"));
    }
    Ok(w.into_iter().map(|(k, v)| (k, v / total)).collect())
}

/// A normalization config from `.toml` or `.json`.
pub fn load_norm(path: &Path) -> CliResult<NormalizationConfig> {
    let raw = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let cfg: NormalizationConfig = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&raw).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&raw).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
    };
    cfg.validate().map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}
