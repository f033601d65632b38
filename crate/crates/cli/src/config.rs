//! Config file sections and their resolution against command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vecsim_core::{
    generate_workload, load_workload, BuiltinWorkload, GenParams, MetricsConfig,
    Platform, PlatformConfig, PolicyKind, SimOptions, WorkloadSpec,
};

use crate::error::CliError;

/// Workload name that generates from the `[workload]` section as-is.
pub const SYNTHETIC: &str = "synthetic";

/// Seeds used by `compare` and `sweep` when none are given.
pub const DEFAULT_SEEDS: std::ops::Range<u64> = 0..10;

pub const DEFAULT_SEED: u64 = 42;

/// The whole config file. Every section and key is optional; unknown keys
/// are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub run: RunSection,
    pub workload: GenParams,
    pub platform: PlatformConfig,
    pub sim: SimSection,
    pub metrics: MetricsConfig,
    pub lsbts: LsbtsSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Builtin name, `synthetic`, or a comma separated list of those.
    pub workload: Option<String>,
    pub workload_file: Option<PathBuf>,
    pub policy: Option<PolicyKind>,
    pub policies: Option<Vec<PolicyKind>>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub approx_fraction: Option<f64>,
    pub trace: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LsbtsSection {
    pub bc_overhead: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn sim_options(&self, trace_flag: bool) -> Result<SimOptions, CliError> {
        let defaults = SimOptions::default();
        let sim = SimOptions {
            approx_fraction: self.sim.approx_fraction.unwrap_or(defaults.approx_fraction),
            bc_overhead: self.lsbts.bc_overhead.unwrap_or(defaults.bc_overhead),
            trace: trace_flag || self.sim.trace.unwrap_or(false),
        };
        sim.validate().map_err(CliError::config)?;
        Ok(sim)
    }
}

/// Where a workload comes from. Echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadSource {
    Builtin { name: String, params: GenParams },
    Synthetic { params: GenParams },
    File { path: String },
}

impl WorkloadSource {
    /// Resolves a selector. A file wins over a name.
    pub fn select(name: Option<&str>, file: Option<&Path>, params: &GenParams) -> Result<Self, CliError> {
        if let Some(path) = file {
            return Ok(Self::File {
                path: path.display().to_string(),
            });
        }
        let name = name.unwrap_or(BuiltinWorkload::Healthcare.name());
        if name == SYNTHETIC {
            params.validate().map_err(CliError::config)?;
            return Ok(Self::Synthetic { params: params.clone() });
        }
        let which = BuiltinWorkload::parse(name).map_err(|_| {
            let valid: Vec<_> = BuiltinWorkload::ALL.iter().map(|w| w.name()).chain([SYNTHETIC]).collect();
            CliError::config(format!("unknown workload `{name}` (valid: {})", valid.join(", ")))
        })?;
        let params = which.params(params);
        params.validate().map_err(CliError::config)?;
        Ok(Self::Builtin {
            name: which.name().to_string(),
            params,
        })
    }

    /// Short name used in table rows.
    pub fn label(&self) -> String {
        match self {
            Self::Builtin { name, .. } => name.clone(),
            Self::Synthetic { .. } => SYNTHETIC.to_string(),
            Self::File { path } => Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.clone()),
        }
    }

    /// The builtin scenario, if any.
    pub fn builtin(&self) -> Option<BuiltinWorkload> {
        match self {
            Self::Builtin { name, .. } => BuiltinWorkload::parse(name).ok(),
            _ => None,
        }
    }

    /// Materializes the workload. Generated workloads depend on `seed`; files
    /// do not.
    pub fn load(&self, seed: u64) -> Result<WorkloadSpec, CliError> {
        match self {
            Self::Builtin { name, params } => {
                // `params` already carries the builtin overrides.
                let which = BuiltinWorkload::parse(name).map_err(CliError::config)?;
                generate_workload(which.name(), params, seed).map_err(CliError::config)
            }
            Self::Synthetic { params } => generate_workload(SYNTHETIC, params, seed).map_err(CliError::config),
            Self::File { path } => load_workload(path).map_err(CliError::config),
        }
    }
}

/// Parses a comma separated workload list.
pub fn workload_list(
    names: Option<&str>,
    file: Option<&Path>,
    params: &GenParams,
    default_all: bool,
) -> Result<Vec<WorkloadSource>, CliError> {
    if file.is_some() {
        return Ok(vec![WorkloadSource::select(None, file, params)?]);
    }
    match names {
        Some(list) => {
            let items: Vec<_> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            if items.is_empty() {
                return Err(CliError::config("empty workload list"));
            }
            items
                .into_iter()
                .map(|n| WorkloadSource::select(Some(n), None, params))
                .collect()
        }
        None if default_all => BuiltinWorkload::ALL
            .iter()
            .map(|w| WorkloadSource::select(Some(w.name()), None, params))
            .collect(),
        None => Ok(vec![WorkloadSource::select(None, None, params)?]),
    }
}

/// Parses `0..10`, `1,2,3` or a mix such as `0..3,7`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = |part: &str| CliError::config(format!("invalid seed list entry `{part}`"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad(part))?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad(part))?;
            if hi <= lo {
                return Err(bad(part));
            }
            seeds.extend(lo..hi);
        } else {
            seeds.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if seeds.is_empty() {
        return Err(CliError::config("empty seed list"));
    }
    Ok(seeds)
}

/// Parses a comma separated policy list.
pub fn parse_policies(text: &str) -> Result<Vec<PolicyKind>, CliError> {
    let policies = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<PolicyKind>().map_err(CliError::config))
        .collect::<Result<Vec<_>, _>>()?;
    if policies.is_empty() {
        return Err(CliError::config("empty policy list"));
    }
    Ok(policies)
}

pub fn build_platform(config: &PlatformConfig) -> Result<Platform, CliError> {
    vecsim_core::build_platform(config).map_err(CliError::config)
}

/// Checks a workload against the platform before anything runs.
pub fn check_workload(platform: &Platform, workload: &WorkloadSpec) -> Result<(), CliError> {
    vecsim_core::simengine::check_owners(platform, workload).map_err(CliError::config)
}
