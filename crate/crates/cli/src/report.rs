//! Report documents and table rendering.
//!
//! Comparison tables share one stable column set. Improvement columns are
//! filled on the mean rows of every policy other than the reference (the
//! first policy listed) and read as "the reference versus this row":
//!
//! * `qos_gain_pct = (QoS_ref - QoS_row) / QoS_ref * 100` (share of the winner)
//! * `qos_ratio = QoS_ref / QoS_row`
//! * `cost_reduction_pct = (Cost_row - Cost_ref) / Cost_row * 100`
//!
//! `published_qos_gain_pct` and `published_cost_reduction_pct` carry the published
//! figures where one exists (PVEC against Random or LSBTS on a builtin
//! workload).

use serde::Serialize;
use vecsim_core::{BuiltinWorkload, MetricsConfig, MetricsReport, PlatformConfig, PolicyKind, SimOptions};

use crate::config::WorkloadSource;
use crate::error::CliError;

pub const COLUMNS: [&str; 19] = [
    "kind",
    "workload",
    "policy",
    "seed",
    "runs",
    "qos",
    "qor",
    "cost",
    "nmd",
    "privacy_fraction",
    "ep_ul",
    "ep_rsu",
    "cp",
    "reference",
    "qos_gain_pct",
    "qos_ratio",
    "cost_reduction_pct",
    "published_qos_gain_pct",
    "published_cost_reduction_pct",
];

pub const CONVENTIONS: [(&str, &str); 3] = [
    ("qos_gain_pct", "(QoS_ref - QoS_row) / QoS_ref * 100"),
    ("qos_ratio", "QoS_ref / QoS_row"),
    ("cost_reduction_pct", "(Cost_row - Cost_ref) / Cost_row * 100"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Run,
    Mean,
}

impl RowKind {
    fn as_str(self) -> &'static str {
        match self {
            Self::Run => "run",
            Self::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub kind: RowKind,
    pub workload: String,
    pub policy: PolicyKind,
    pub seed: Option<u64>,
    pub runs: usize,
    pub qos: f64,
    pub qor: f64,
    pub cost: f64,
    pub nmd: f64,
    pub privacy_fraction: f64,
    pub ep_ul: f64,
    pub ep_rsu: f64,
    pub cp: f64,
    pub reference: Option<PolicyKind>,
    pub qos_gain_pct: Option<f64>,
    pub qos_ratio: Option<f64>,
    pub cost_reduction_pct: Option<f64>,
    pub published_qos_gain_pct: Option<f64>,
    pub published_cost_reduction_pct: Option<f64>,
}

impl Row {
    pub fn run(workload: &str, policy: PolicyKind, seed: u64, m: &MetricsReport) -> Self {
        Self {
            kind: RowKind::Run,
            workload: workload.to_string(),
            policy,
            seed: Some(seed),
            runs: 1,
            qos: m.qos,
            qor: m.qor,
            cost: m.cost,
            nmd: m.nmd as f64,
            privacy_fraction: m.privacy_fraction,
            ep_ul: m.ep_ul as f64,
            ep_rsu: m.ep_rsu as f64,
            cp: m.cp as f64,
            reference: None,
            qos_gain_pct: None,
            qos_ratio: None,
            cost_reduction_pct: None,
            published_qos_gain_pct: None,
            published_cost_reduction_pct: None,
        }
    }

    /// Mean over run rows of a single policy.
    pub fn mean(rows: &[&Row]) -> Self {
        let n = rows.len() as f64;
        let avg = |f: fn(&Row) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
        Self {
            kind: RowKind::Mean,
            workload: rows[0].workload.clone(),
            policy: rows[0].policy,
            seed: None,
            runs: rows.len(),
            qos: avg(|r| r.qos),
            qor: avg(|r| r.qor),
            cost: avg(|r| r.cost),
            nmd: avg(|r| r.nmd),
            privacy_fraction: avg(|r| r.privacy_fraction),
            ep_ul: avg(|r| r.ep_ul),
            ep_rsu: avg(|r| r.ep_rsu),
            cp: avg(|r| r.cp),
            reference: None,
            qos_gain_pct: None,
            qos_ratio: None,
            cost_reduction_pct: None,
            published_qos_gain_pct: None,
            published_cost_reduction_pct: None,
        }
    }

    /// Fills the improvement columns of `self` against `reference`.
    pub fn compare_to(&mut self, reference: &Row, builtin: Option<BuiltinWorkload>) {
        self.reference = Some(reference.policy);
        self.qos_gain_pct = Some(share_of_winner(reference.qos, self.qos));
        self.qos_ratio = Some(reference.qos / self.qos);
        self.cost_reduction_pct = (self.cost > 0.0).then(|| (self.cost - reference.cost) / self.cost * 100.0);
        if let (PolicyKind::Pvec, Some(w)) = (reference.policy, builtin) {
            if let Some((q, c)) = published_figures(w, self.policy) {
                self.published_qos_gain_pct = Some(q);
                self.published_cost_reduction_pct = Some(c);
            }
        }
    }

    pub fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.kind.as_str().to_string(),
            self.workload.clone(),
            self.policy.name().to_string(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.runs.to_string(),
            self.qos.to_string(),
            self.qor.to_string(),
            self.cost.to_string(),
            self.nmd.to_string(),
            self.privacy_fraction.to_string(),
            self.ep_ul.to_string(),
            self.ep_rsu.to_string(),
            self.cp.to_string(),
            self.reference.map(|p| p.name().to_string()).unwrap_or_default(),
            opt(self.qos_gain_pct),
            opt(self.qos_ratio),
            opt(self.cost_reduction_pct),
            opt(self.published_qos_gain_pct),
            opt(self.published_cost_reduction_pct),
        ]
    }
}

/// `(a - b) / a * 100`: how much of the winner's value the loser lacks.
pub fn share_of_winner(a: f64, b: f64) -> f64 {
    (a - b) / a * 100.0
}

/// Published PVEC improvements as (QoS gain %, cost reduction %).
pub fn published_figures(workload: BuiltinWorkload, baseline: PolicyKind) -> Option<(f64, f64)> {
    use BuiltinWorkload::*;
    use PolicyKind::*;
    Some(match (baseline, workload) {
        (Random, Healthcare) => (55.0, 61.0),
        (Random, ETransport) => (53.0, 60.0),
        (Random, EBusiness) => (50.0, 63.0),
        (Lsbts, Healthcare) => (30.0, 56.0),
        (Lsbts, ETransport) => (25.0, 49.0),
        (Lsbts, EBusiness) => (24.0, 53.0),
        _ => return None,
    })
}

/// Run rows in (policy, seed) order followed by one mean row per policy.
pub fn table(
    workload: &WorkloadSource,
    policies: &[PolicyKind],
    seeds: &[u64],
    metrics: &[MetricsReport],
) -> Vec<Row> {
    let label = workload.label();
    let mut rows = Vec::with_capacity(metrics.len() + policies.len());
    for (i, &policy) in policies.iter().enumerate() {
        for (j, &seed) in seeds.iter().enumerate() {
            rows.push(Row::run(&label, policy, seed, &metrics[i * seeds.len() + j]));
        }
    }
    let mut means: Vec<Row> = policies
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let block: Vec<&Row> = rows[i * seeds.len()..(i + 1) * seeds.len()].iter().collect();
            Row::mean(&block)
        })
        .collect();
    let reference = means[0].clone();
    for mean in means.iter_mut().skip(1) {
        mean.compare_to(&reference, workload.builtin());
    }
    rows.extend(means);
    rows
}

/// Configuration echo shared by every report.
#[derive(Debug, Clone, Serialize)]
pub struct SettingsEcho {
    pub platform: PlatformConfig,
    pub sim: SimOptions,
    pub metrics: MetricsConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareEcho {
    pub workloads: Vec<WorkloadSource>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    #[serde(flatten)]
    pub settings: SettingsEcho,
    pub conventions: std::collections::BTreeMap<&'static str, &'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub config: CompareEcho,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    #[serde(flatten)]
    pub row: Row,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub parameter: String,
    pub values: Vec<f64>,
    pub config: CompareEcho,
    pub rows: Vec<SweepRow>,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::runtime)?;
    text.push('\n');
    Ok(text)
}

/// Writes a header and records into a CSV string.
pub fn to_csv<'a>(header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(CliError::runtime)?;
    for record in records {
        w.write_record(&record).map_err(CliError::runtime)?;
    }
    let bytes = w.into_inner().map_err(CliError::runtime)?;
    String::from_utf8(bytes).map_err(CliError::runtime)
}

pub fn compare_csv(rows: &[Row]) -> Result<String, CliError> {
    to_csv(&COLUMNS, rows.iter().map(Row::record))
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let header: Vec<&str> = ["parameter", "value"].into_iter().chain(COLUMNS).collect();
    to_csv(
        &header,
        rows.iter().map(|r| {
            let mut rec = vec![r.parameter.clone(), r.value.to_string()];
            rec.extend(r.row.record());
            rec
        }),
    )
}
