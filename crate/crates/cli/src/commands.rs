//! Subcommand implementations. Each returns the full output document so that
//! nothing is written before the command has succeeded.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use vecsim_core::oracle::{brute_force_best, brute_force_best_shielded, replay_qos};
use vecsim_core::simengine::Event;
use vecsim_core::{
    run, summarize, BuiltinWorkload, Error as CoreError, MetricsConfig, MetricsReport,
    OracleResult, Platform, PlatformConfig, PolicyKind, SimOptions, TaskOutcome,
};

use crate::config::{
    build_platform, check_workload, parse_policies, parse_seeds, workload_list, FileConfig, WorkloadSource,
    DEFAULT_SEED, DEFAULT_SEEDS,
};
use crate::error::CliError;
use crate::report::{self, CompareEcho, CompareReport, Row, SettingsEcho, SweepReport, SweepRow, CONVENTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by the experiment subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Builtin workload name or `synthetic`; `compare` and `sweep` accept a
    /// comma separated list.
    #[arg(long)]
    pub workload: Option<String>,
    /// Workload JSON file (takes precedence over --workload).
    #[arg(long)]
    pub workload_file: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub policy: Option<PolicyKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Include the event log in the report.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma separated policies; the first is the reference for improvements.
    #[arg(long)]
    pub policies: Option<String>,
    /// Seeds as a list and/or half-open ranges, e.g. `0..10` or `1,2,5`.
    #[arg(long)]
    pub seeds: Option<String>,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub compare: CompareArgs,
    /// One of k_cloud, approx_fraction, rsu_count, latency_cloud, srp.
    #[arg(long)]
    pub param: String,
    /// Comma separated values.
    #[arg(long, allow_hyphen_values = true)]
    pub values: String,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Seed for generated workloads and the Random policy.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Let Private and Restricted tasks go anywhere.
    #[arg(long)]
    pub ignore_privacy: bool,
    /// Also let non-Public tasks pay the consensus overhead for privacy credit.
    #[arg(long)]
    pub shielded: bool,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct GenArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub workload: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_config(path: Option<&PathBuf>) -> Result<FileConfig, CliError> {
    path.map(|p| FileConfig::load(p)).transpose().map(Option::unwrap_or_default)
}

struct Settings {
    platform_config: PlatformConfig,
    platform: Platform,
    sim: SimOptions,
    metrics: MetricsConfig,
}

impl Settings {
    fn resolve(cfg: &FileConfig, trace: bool) -> Result<Self, CliError> {
        let platform = build_platform(&cfg.platform)?;
        let sim = cfg.sim_options(trace)?;
        cfg.metrics.validate().map_err(CliError::config)?;
        Ok(Self {
            platform_config: cfg.platform.clone(),
            platform,
            sim,
            metrics: cfg.metrics,
        })
    }

    fn echo(&self) -> SettingsEcho {
        SettingsEcho {
            platform: self.platform_config.clone(),
            sim: self.sim,
            metrics: self.metrics,
        }
    }
}

fn single_source(common: &CommonArgs, cfg: &FileConfig) -> Result<WorkloadSource, CliError> {
    let name = common.workload.as_deref().or(cfg.run.workload.as_deref());
    if name.is_some_and(|n| n.contains(',')) {
        return Err(CliError::config("this command takes a single workload"));
    }
    let file = common.workload_file.as_deref().or(cfg.run.workload_file.as_deref());
    WorkloadSource::select(name, file, &cfg.workload)
}

fn runtime(e: CoreError) -> CliError {
    CliError::runtime(e)
}

#[derive(Serialize)]
struct RunEcho {
    workload: WorkloadSource,
    policy: PolicyKind,
    seed: u64,
    #[serde(flatten)]
    settings: SettingsEcho,
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: RunEcho,
    metrics: MetricsReport,
    outcomes: &'a [TaskOutcome],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    events: &'a [Event<f64>],
}

pub fn cmd_run(args: &RunArgs) -> Result<String, CliError> {
    let cfg = load_config(args.common.config.as_ref())?;
    if args.common.format == Some(Format::Csv) {
        return Err(CliError::config("run reports are JSON only"));
    }
    let source = single_source(&args.common, &cfg)?;
    let policy = args.policy.or(cfg.run.policy).unwrap_or(PolicyKind::Pvec);
    let seed = args.seed.or(cfg.run.seed).unwrap_or(DEFAULT_SEED);
    let settings = Settings::resolve(&cfg, args.trace)?;
    let workload = source.load(seed)?;
    check_workload(&settings.platform, &workload)?;

    let trace = run(&settings.platform, &workload, policy, seed, &settings.sim).map_err(runtime)?;
    let metrics = summarize(&trace, &settings.platform, &settings.metrics).map_err(runtime)?;
    report::to_json(&RunReport {
        config: RunEcho {
            workload: source,
            policy,
            seed,
            settings: settings.echo(),
        },
        metrics,
        outcomes: &trace.outcomes,
        events: &trace.events,
    })
}

struct CompareSetup {
    workloads: Vec<WorkloadSource>,
    policies: Vec<PolicyKind>,
    seeds: Vec<u64>,
    cfg: FileConfig,
}

impl CompareSetup {
    fn resolve(args: &CompareArgs) -> Result<Self, CliError> {
        let cfg = load_config(args.common.config.as_ref())?;
        let policies = match (&args.policies, &cfg.run.policies) {
            (Some(text), _) => parse_policies(text)?,
            (None, Some(list)) if !list.is_empty() => list.clone(),
            (None, Some(_)) => return Err(CliError::config("empty policy list")),
            (None, None) => PolicyKind::ALL.to_vec(),
        };
        let seeds = match (&args.seeds, &cfg.run.seeds) {
            (Some(text), _) => parse_seeds(text)?,
            (None, Some(list)) if !list.is_empty() => list.clone(),
            (None, Some(_)) => return Err(CliError::config("empty seed list")),
            (None, None) => DEFAULT_SEEDS.collect(),
        };
        let names = args.common.workload.as_deref().or(cfg.run.workload.as_deref());
        let file = args.common.workload_file.as_deref().or(cfg.run.workload_file.as_deref());
        let workloads = workload_list(names, file, &cfg.workload, true)?;
        Ok(Self {
            workloads,
            policies,
            seeds,
            cfg,
        })
    }

    fn echo(&self, settings: &Settings) -> CompareEcho {
        CompareEcho {
            workloads: self.workloads.clone(),
            policies: self.policies.clone(),
            seeds: self.seeds.clone(),
            settings: settings.echo(),
            conventions: CONVENTIONS.into_iter().collect::<BTreeMap<_, _>>(),
        }
    }
}

/// Metrics of every (policy, seed) pair of one workload, policy-major.
pub fn evaluate(
    source: &WorkloadSource,
    policies: &[PolicyKind],
    seeds: &[u64],
    platform: &Platform,
    sim: &SimOptions,
    metrics: &MetricsConfig,
) -> Result<Vec<MetricsReport>, CliError> {
    let sim = SimOptions { trace: false, ..*sim };
    let per_seed: Vec<Vec<MetricsReport>> = seeds
        .par_iter()
        .map(|&seed| {
            let workload = source.load(seed)?;
            check_workload(platform, &workload)?;
            policies
                .iter()
                .map(|&policy| {
                    let trace = run(platform, &workload, policy, seed, &sim).map_err(runtime)?;
                    summarize(&trace, platform, metrics).map_err(runtime)
                })
                .collect()
        })
        .collect::<Result<_, CliError>>()?;
    Ok((0..policies.len())
        .flat_map(|p| per_seed.iter().map(move |row| row[p]))
        .collect())
}

fn compare_rows(setup: &CompareSetup, settings: &Settings) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for source in &setup.workloads {
        let metrics = evaluate(
            source,
            &setup.policies,
            &setup.seeds,
            &settings.platform,
            &settings.sim,
            &settings.metrics,
        )?;
        rows.extend(report::table(source, &setup.policies, &setup.seeds, &metrics));
    }
    Ok(rows)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<String, CliError> {
    let setup = CompareSetup::resolve(args)?;
    let settings = Settings::resolve(&setup.cfg, false)?;
    let rows = compare_rows(&setup, &settings)?;
    match args.common.format.unwrap_or(Format::Csv) {
        Format::Csv => report::compare_csv(&rows),
        Format::Json => report::to_json(&CompareReport {
            config: setup.echo(&settings),
            rows,
        }),
    }
}

pub const SWEEP_PARAMETERS: [&str; 5] = ["k_cloud", "approx_fraction", "rsu_count", "latency_cloud", "srp"];

fn apply_sweep(cfg: &mut FileConfig, param: &str, value: f64) -> Result<(), CliError> {
    match param {
        "k_cloud" => cfg.platform.k_cloud = value,
        "approx_fraction" => cfg.sim.approx_fraction = Some(value),
        "latency_cloud" => cfg.platform.latency_cloud = value,
        "srp" => cfg.platform.srp = value,
        "rsu_count" => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(CliError::config(format!("rsu_count must be a whole number, got {value}")));
            }
            cfg.platform.rsu_count = value as usize;
        }
        _ => unreachable!("parameter names are checked first"),
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    if !SWEEP_PARAMETERS.contains(&args.param.as_str()) {
        return Err(CliError::config(format!(
            "unknown sweep parameter `{}` (valid: {})",
            args.param,
            SWEEP_PARAMETERS.join(", ")
        )));
    }
    let values = args
        .values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::config(format!("invalid sweep value `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::config("empty sweep value list"));
    }
    let setup = CompareSetup::resolve(&args.compare)?;
    let base = Settings::resolve(&setup.cfg, false)?;

    let mut variants = Vec::with_capacity(values.len());
    for &value in &values {
        let mut cfg = setup.cfg.clone();
        apply_sweep(&mut cfg, &args.param, value)?;
        variants.push(Settings::resolve(&cfg, false)?);
    }
    let mut rows = Vec::new();
    for (&value, settings) in values.iter().zip(&variants) {
        for row in compare_rows(&setup, settings)? {
            rows.push(SweepRow {
                parameter: args.param.clone(),
                value,
                row,
            });
        }
    }
    match args.compare.common.format.unwrap_or(Format::Csv) {
        Format::Csv => report::sweep_csv(&rows),
        Format::Json => report::to_json(&SweepReport {
            parameter: args.param.clone(),
            values,
            config: setup.echo(&base),
            rows,
        }),
    }
}

#[derive(Serialize)]
struct OracleEcho {
    workload: WorkloadSource,
    seed: u64,
    honor_privacy: bool,
    shielded: bool,
    #[serde(flatten)]
    settings: SettingsEcho,
}

#[derive(Serialize)]
struct PolicyScore {
    policy: PolicyKind,
    qos: f64,
}

#[derive(Serialize)]
struct OracleReport {
    config: OracleEcho,
    result: OracleResult,
    replay_qos: f64,
    policies: Vec<PolicyScore>,
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<String, CliError> {
    let cfg = load_config(args.common.config.as_ref())?;
    let source = single_source(&args.common, &cfg)?;
    let seed = args.seed.or(cfg.run.seed).unwrap_or(DEFAULT_SEED);
    let settings = Settings::resolve(&cfg, false)?;
    let workload = source.load(seed)?;
    check_workload(&settings.platform, &workload)?;
    let honor_privacy = !args.ignore_privacy;

    let search = if args.shielded {
        brute_force_best_shielded
    } else {
        brute_force_best
    };
    let result = search(&settings.platform, &workload, honor_privacy, &settings.sim, &settings.metrics)
        .map_err(|e| match e {
            CoreError::OracleTooLarge { .. } | CoreError::OracleEmpty => CliError::config(e),
            e => CliError::runtime(e),
        })?;
    let replay = replay_qos(&settings.platform, &workload, &result, &settings.sim, &settings.metrics).map_err(runtime)?;
    let policies = PolicyKind::ALL
        .iter()
        .map(|&policy| {
            let trace = run(&settings.platform, &workload, policy, seed, &settings.sim).map_err(runtime)?;
            let qos = summarize(&trace, &settings.platform, &settings.metrics).map_err(runtime)?.qos;
            Ok(PolicyScore { policy, qos })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    match args.common.format.unwrap_or(Format::Json) {
        Format::Json => report::to_json(&OracleReport {
            config: OracleEcho {
                workload: source,
                seed,
                honor_privacy,
                shielded: args.shielded,
                settings: settings.echo(),
            },
            result,
            replay_qos: replay,
            policies,
        }),
        Format::Csv => report::to_csv(
            &["task_id", "layer", "node_id", "mode", "shielded"],
            result.best_assignment.iter().map(|a| {
                vec![
                    a.task_id.to_string(),
                    a.layer.to_string(),
                    a.node_id.to_string(),
                    a.mode.name().to_string(),
                    result.shielded.contains(&a.task_id).to_string(),
                ]
            }),
        ),
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<String, CliError> {
    let cfg = load_config(args.config.as_ref())?;
    let name = args
        .workload
        .as_deref()
        .or(cfg.run.workload.as_deref())
        .unwrap_or(BuiltinWorkload::Healthcare.name());
    let seed = args.seed.or(cfg.run.seed).unwrap_or(DEFAULT_SEED);
    let workload = WorkloadSource::select(Some(name), None, &cfg.workload)?.load(seed)?;
    Ok(workload.to_canonical_json())
}
