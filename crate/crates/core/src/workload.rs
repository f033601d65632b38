//! Task model, synthetic workload generation and the workload file format.
//!
//! A workload is an ordered list of [`TaskSpec`]s. Each task carries three
//! independent classifications (privacy, real-time, accuracy) that drive the
//! placement policies. The builtin workloads reproduce the aggregate task
//! counts of the Healthcare, E-Transport and E-Business scenarios; every
//! composition detail the aggregates leave open is a [`GenParams`] field.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyClass {
    Public,
    Restricted,
    Private,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealTimeClass {
    Soft,
    Firm,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccuracyClass {
    Accurate,
    Approximate,
}

impl PrivacyClass {
    pub const ALL: [PrivacyClass; 3] = [Self::Public, Self::Restricted, Self::Private];
}

impl RealTimeClass {
    pub const ALL: [RealTimeClass; 3] = [Self::Soft, Self::Firm, Self::Hard];
}

impl AccuracyClass {
    pub const ALL: [AccuracyClass; 2] = [Self::Accurate, Self::Approximate];
}

/// One application task. Times are absolute seconds, `size` is abstract work units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec<F> {
    pub id: u64,
    /// Index of the vehicle that issued the task.
    pub owner: usize,
    pub size: F,
    pub privacy: PrivacyClass,
    pub rt: RealTimeClass,
    pub accuracy: AccuracyClass,
    pub arrival: F,
    pub deadline: F,
}

impl<F: Scalar> TaskSpec<F> {
    pub fn class(&self) -> ClassKey {
        ClassKey {
            privacy: self.privacy,
            rt: self.rt,
            accuracy: self.accuracy,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Error::InvalidTask {
            task_id: self.id,
            field,
            reason,
        };
        if !(self.size.is_finite() && self.size > F::zero()) {
            return Err(bad("size", format!("must be finite and > 0, got {}", self.size)));
        }
        if !(self.arrival.is_finite() && self.arrival >= F::zero()) {
            return Err(bad("arrival", format!("must be finite and >= 0, got {}", self.arrival)));
        }
        if !(self.deadline.is_finite() && self.deadline > self.arrival) {
            return Err(bad(
                "deadline",
                format!("must exceed arrival {}, got {}", self.arrival, self.deadline),
            ));
        }
        Ok(())
    }
}

/// One cell of the privacy × real-time × accuracy grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey {
    pub privacy: PrivacyClass,
    pub rt: RealTimeClass,
    pub accuracy: AccuracyClass,
}

impl ClassKey {
    /// All 18 cells in a fixed order.
    pub fn grid() -> impl Iterator<Item = ClassKey> {
        PrivacyClass::ALL.into_iter().flat_map(|privacy| {
            RealTimeClass::ALL.into_iter().flat_map(move |rt| {
                AccuracyClass::ALL
                    .into_iter()
                    .map(move |accuracy| ClassKey { privacy, rt, accuracy })
            })
        })
    }
}

/// A validated workload: tasks sorted by `(arrival, id)` with their class tally.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec<F> {
    pub name: String,
    tasks: Vec<TaskSpec<F>>,
    class_counts: BTreeMap<ClassKey, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadFile<F> {
    name: String,
    tasks: Vec<TaskSpec<F>>,
}

impl<F: Scalar> WorkloadSpec<F> {
    /// Validates every task and canonicalizes the order. Invalid records are
    /// rejected, never repaired.
    pub fn new(name: impl Into<String>, mut tasks: Vec<TaskSpec<F>>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tasks.len());
        for task in &tasks {
            task.validate()?;
            if !seen.insert(task.id) {
                return Err(Error::DuplicateTaskId(task.id));
            }
        }
        tasks.sort_by(|a, b| {
            a.arrival
                .partial_cmp(&b.arrival)
                .expect("validated arrivals are finite")
                .then(a.id.cmp(&b.id))
        });
        let mut class_counts = BTreeMap::new();
        for task in &tasks {
            *class_counts.entry(task.class()).or_insert(0) += 1;
        }
        Ok(Self {
            name: name.into(),
            tasks,
            class_counts,
        })
    }

    pub fn tasks(&self) -> &[TaskSpec<F>] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn class_counts(&self) -> &BTreeMap<ClassKey, usize> {
        &self.class_counts
    }

    pub fn count_where(&self, pred: impl Fn(&TaskSpec<F>) -> bool) -> usize {
        self.tasks.iter().filter(|t| pred(t)).count()
    }

    /// Largest owner index plus one, or zero for an empty workload.
    pub fn vehicles_referenced(&self) -> usize {
        self.tasks.iter().map(|t| t.owner + 1).max().unwrap_or(0)
    }

    /// Canonical JSON text: stable field order, tasks sorted by `(arrival, id)`.
    pub fn to_canonical_json(&self) -> String {
        let file = WorkloadFile {
            name: self.name.clone(),
            tasks: self.tasks.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("workload serializes");
        text.push('\n');
        text
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: WorkloadFile<F> = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::new(file.name, file.tasks)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_canonical_json())?;
        Ok(())
    }
}

/// Reads and validates a workload file.
pub fn load_workload<F: Scalar>(path: impl AsRef<Path>) -> Result<WorkloadSpec<F>> {
    let text = std::fs::read_to_string(path)?;
    WorkloadSpec::from_json_str(&text)
}

/// The three builtin scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BuiltinWorkload {
    #[serde(rename = "healthcare")]
    Healthcare,
    #[serde(rename = "e-transport")]
    ETransport,
    #[serde(rename = "e-business")]
    EBusiness,
}

impl BuiltinWorkload {
    pub const ALL: [BuiltinWorkload; 3] = [Self::Healthcare, Self::ETransport, Self::EBusiness];

    pub fn name(self) -> &'static str {
        match self {
            Self::Healthcare => "healthcare",
            Self::ETransport => "e-transport",
            Self::EBusiness => "e-business",
        }
    }

    /// `(general tasks, private tasks, real-time tasks)`.
    pub fn table_counts(self) -> (usize, usize, usize) {
        match self {
            Self::Healthcare => (1500, 300, 200),
            Self::ETransport => (1000, 150, 250),
            Self::EBusiness => (1500, 250, 250),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|w| w.name() == name)
            .ok_or_else(|| Error::UnknownWorkload {
                name: name.to_string(),
                valid: Self::ALL.map(|w| w.name()).join(", "),
            })
    }

    /// `params` with the task count and the Private / Hard shares replaced by
    /// this scenario's aggregates.
    pub fn params(self, base: &GenParams) -> GenParams {
        let (total, private, realtime) = self.table_counts();
        GenParams {
            tasks: total,
            private_share: private as f64 / total as f64,
            hard_share: realtime as f64 / total as f64,
            ..base.clone()
        }
    }
}

impl fmt::Display for BuiltinWorkload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Synthetic workload composition and distributions.
///
/// Shares are fractions of the total task count and are turned into exact
/// counts by rounding; every class label is then assigned by an independent
/// shuffle, so classes of different dimensions overlap freely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenParams {
    pub tasks: usize,
    /// Owners are drawn uniformly from `0..vehicles`.
    pub vehicles: usize,
    pub private_share: f64,
    /// `None`: half the Private count (rounded down), drawn from non-Private tasks.
    pub restricted_share: Option<f64>,
    pub hard_share: f64,
    /// `None`: half of the non-Hard tasks (rounded down); the rest are Soft.
    pub firm_share: Option<f64>,
    pub approximate_share: f64,
    /// Sizes are log-uniform in `[size_min, size_max]`.
    pub size_min: f64,
    pub size_max: f64,
    /// Deadline = arrival + size / reference_speed × slack.
    pub reference_speed: f64,
    pub slack_hard: [f64; 2],
    pub slack_firm: [f64; 2],
    pub slack_soft: [f64; 2],
    /// Arrivals uniform in `[0, arrival_window]`; zero means one batch at t = 0.
    pub arrival_window: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            tasks: 0,
            vehicles: crate::infrastructure::DEFAULT_VEHICLES,
            private_share: 0.0,
            restricted_share: None,
            hard_share: 0.0,
            firm_share: None,
            approximate_share: 0.6,
            size_min: 50.0,
            size_max: 500.0,
            reference_speed: DEFAULT_REFERENCE_SPEED,
            slack_hard: [1.2, 2.0],
            slack_firm: [2.0, 5.0],
            slack_soft: [5.0, 20.0],
            arrival_window: 0.0,
        }
    }
}

/// Work units per second used to turn sizes into deadline budgets.
pub const DEFAULT_REFERENCE_SPEED: f64 = 125.0;

/// Class counts resolved from a [`GenParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Composition {
    pub private: usize,
    pub restricted: usize,
    pub hard: usize,
    pub firm: usize,
    pub approximate: usize,
}

fn share_count(share: f64, n: usize) -> usize {
    ((share * n as f64).round() as usize).min(n)
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidGenParams { field, reason });
        let shares = [
            ("private_share", Some(self.private_share)),
            ("restricted_share", self.restricted_share),
            ("hard_share", Some(self.hard_share)),
            ("firm_share", self.firm_share),
            ("approximate_share", Some(self.approximate_share)),
        ];
        for (field, share) in shares {
            if let Some(s) = share {
                if !(0.0..=1.0).contains(&s) {
                    return bad(field, format!("must lie in [0, 1], got {s}"));
                }
            }
        }
        const EPS: f64 = 1e-12;
        if let Some(r) = self.restricted_share {
            if self.private_share + r > 1.0 + EPS {
                return bad("restricted_share", "private + restricted shares exceed 1".into());
            }
        }
        if let Some(f) = self.firm_share {
            if self.hard_share + f > 1.0 + EPS {
                return bad("firm_share", "hard + firm shares exceed 1".into());
            }
        }
        if self.tasks > 0 && self.vehicles == 0 {
            return bad("vehicles", "at least one vehicle is needed to own tasks".into());
        }
        if !(self.size_min.is_finite() && self.size_min > 0.0) {
            return bad("size_min", format!("must be > 0, got {}", self.size_min));
        }
        if !(self.size_max.is_finite() && self.size_max >= self.size_min) {
            return bad("size_max", format!("must be >= size_min, got {}", self.size_max));
        }
        if !(self.reference_speed.is_finite() && self.reference_speed > 0.0) {
            return bad("reference_speed", format!("must be > 0, got {}", self.reference_speed));
        }
        for (field, [lo, hi]) in [
            ("slack_hard", self.slack_hard),
            ("slack_firm", self.slack_firm),
            ("slack_soft", self.slack_soft),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
                return bad(field, format!("need 0 < lo <= hi, got [{lo}, {hi}]"));
            }
        }
        if !(self.arrival_window.is_finite() && self.arrival_window >= 0.0) {
            return bad("arrival_window", format!("must be >= 0, got {}", self.arrival_window));
        }
        Ok(())
    }

    pub fn composition(&self) -> Composition {
        let n = self.tasks;
        let private = share_count(self.private_share, n);
        let restricted = match self.restricted_share {
            Some(s) => share_count(s, n),
            None => private / 2,
        }
        .min(n - private);
        let hard = share_count(self.hard_share, n);
        let firm = match self.firm_share {
            Some(s) => share_count(s, n),
            None => (n - hard) / 2,
        }
        .min(n - hard);
        Composition {
            private,
            restricted,
            hard,
            firm,
            approximate: share_count(self.approximate_share, n),
        }
    }
}

fn labels<T: Copy>(n: usize, counts: &[(T, usize)], rest: T, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut out = Vec::with_capacity(n);
    for &(label, count) in counts {
        out.extend(std::iter::repeat(label).take(count));
    }
    out.resize(n, rest);
    out.shuffle(rng);
    out
}

/// Generates a workload honoring the requested composition exactly.
/// Deterministic in `(params, seed)`.
pub fn generate_workload<F: Scalar>(
    name: impl Into<String>,
    params: &GenParams,
    seed: u64,
) -> Result<WorkloadSpec<F>> {
    params.validate()?;
    let n = params.tasks;
    let comp = params.composition();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let privacy = labels(
        n,
        &[
            (PrivacyClass::Private, comp.private),
            (PrivacyClass::Restricted, comp.restricted),
        ],
        PrivacyClass::Public,
        &mut rng,
    );
    let rt = labels(
        n,
        &[(RealTimeClass::Hard, comp.hard), (RealTimeClass::Firm, comp.firm)],
        RealTimeClass::Soft,
        &mut rng,
    );
    let accuracy = labels(
        n,
        &[(AccuracyClass::Approximate, comp.approximate)],
        AccuracyClass::Accurate,
        &mut rng,
    );

    let (ln_lo, ln_hi) = (params.size_min.ln(), params.size_max.ln());
    let mut tasks = Vec::with_capacity(n);
    for i in 0..n {
        let owner = rng.gen_range(0..params.vehicles);
        let size = if ln_hi > ln_lo {
            rng.gen_range(ln_lo..ln_hi).exp()
        } else {
            params.size_min
        };
        let [lo, hi] = match rt[i] {
            RealTimeClass::Hard => params.slack_hard,
            RealTimeClass::Firm => params.slack_firm,
            RealTimeClass::Soft => params.slack_soft,
        };
        let slack = if hi > lo { rng.gen_range(lo..hi) } else { lo };
        let arrival = if params.arrival_window > 0.0 {
            rng.gen_range(0.0..params.arrival_window)
        } else {
            0.0
        };
        let arrival = F::lit(arrival);
        let size = F::lit(size);
        let budget = size / F::lit(params.reference_speed) * F::lit(slack);
        tasks.push(TaskSpec {
            id: i as u64,
            owner,
            size,
            privacy: privacy[i],
            rt: rt[i],
            accuracy: accuracy[i],
            arrival,
            deadline: arrival + budget,
        });
    }
    WorkloadSpec::new(name, tasks)
}

/// One of the builtin scenarios, looked up by name (`healthcare`,
/// `e-transport`, `e-business`). Only the task count and the Private / Hard
/// shares of `params` are overridden.
pub fn builtin_workload<F: Scalar>(
    name: &str,
    params: &GenParams,
    seed: u64,
) -> Result<WorkloadSpec<F>> {
    let which = BuiltinWorkload::parse(name)?;
    generate_workload(which.name(), &which.params(params), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: u64, arrival: f64, deadline: f64) -> TaskSpec<f64> {
        TaskSpec {
            id,
            owner: 0,
            size: 100.0,
            privacy: PrivacyClass::Public,
            rt: RealTimeClass::Soft,
            accuracy: AccuracyClass::Accurate,
            arrival,
            deadline,
        }
    }

    #[test]
    fn table_counts_are_reproduced() {
        let base = GenParams::default();
        for (name, total, private, hard) in [
            ("healthcare", 1500, 300, 200),
            ("e-transport", 1000, 150, 250),
            ("e-business", 1500, 250, 250),
        ] {
            let w: WorkloadSpec<f64> = builtin_workload(name, &base, 42).unwrap();
            assert_eq!(w.len(), total);
            assert_eq!(w.count_where(|t| t.privacy == PrivacyClass::Private), private);
            assert_eq!(w.count_where(|t| t.rt == RealTimeClass::Hard), hard);
            assert_eq!(w.class_counts().values().sum::<usize>(), total);
        }
    }

    #[test]
    fn default_composition_of_healthcare() {
        let p = BuiltinWorkload::Healthcare.params(&GenParams::default());
        let c = p.composition();
        assert_eq!(c.restricted, 150);
        assert_eq!(c.firm, 650);
        assert_eq!(c.approximate, 900);
    }

    #[test]
    fn unknown_workload_lists_valid_names() {
        let err = builtin_workload::<f64>("nosuch", &GenParams::default(), 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown workload"), "{msg}");
        assert!(msg.contains("healthcare, e-transport, e-business"), "{msg}");
    }

    #[test]
    fn forced_composition() {
        let p = GenParams {
            tasks: 10,
            private_share: 1.0,
            hard_share: 1.0,
            approximate_share: 1.0,
            ..GenParams::default()
        };
        let w: WorkloadSpec<f64> = generate_workload("forced", &p, 7).unwrap();
        assert_eq!(w.len(), 10);
        assert!(w.tasks().iter().all(|t| t.privacy == PrivacyClass::Private
            && t.rt == RealTimeClass::Hard
            && t.accuracy == AccuracyClass::Approximate));
    }

    #[test]
    fn empty_workload_is_valid() {
        let p = GenParams::default();
        let w: WorkloadSpec<f64> = generate_workload("empty", &p, 0).unwrap();
        assert!(w.is_empty());
        assert!(w.class_counts().is_empty());
    }

    #[test]
    fn overfull_dimension_is_rejected() {
        let p = GenParams {
            tasks: 10,
            private_share: 0.7,
            restricted_share: Some(0.4),
            ..GenParams::default()
        };
        assert!(matches!(
            generate_workload::<f64>("x", &p, 0),
            Err(Error::InvalidGenParams { field: "restricted_share", .. })
        ));
        let p = GenParams {
            tasks: 10,
            hard_share: 0.5,
            firm_share: Some(0.6),
            ..GenParams::default()
        };
        assert!(generate_workload::<f64>("x", &p, 0).is_err());
        let p = GenParams {
            tasks: 10,
            approximate_share: 1.5,
            ..GenParams::default()
        };
        assert!(generate_workload::<f64>("x", &p, 0).is_err());
    }

    #[test]
    fn deadline_not_after_arrival_names_task() {
        let err = WorkloadSpec::new("w", vec![task(0, 0.0, 1.0), task(7, 2.0, 2.0)]).unwrap_err();
        match err {
            Error::InvalidTask { task_id, field, .. } => {
                assert_eq!(task_id, 7);
                assert_eq!(field, "deadline");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = WorkloadSpec::new("w", vec![task(3, 0.0, 1.0), task(3, 1.0, 2.0)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateTaskId(3)));
    }

    #[test]
    fn tasks_sorted_by_arrival_then_id() {
        let w = WorkloadSpec::new(
            "w",
            vec![task(5, 1.0, 9.0), task(2, 1.0, 9.0), task(9, 0.5, 9.0)],
        )
        .unwrap();
        let ids: Vec<u64> = w.tasks().iter().map(|t| t.id).collect();
        assert_eq!(ids, vec![9, 2, 5]);
    }

    #[test]
    fn parse_error_reports_position() {
        let text = "{\n  \"name\": \"w\",\n  \"tasks\": [ oops ]\n}";
        match WorkloadSpec::<f64>::from_json_str(text).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn file_enums_are_lowercase() {
        let w = WorkloadSpec::new("w", vec![task(0, 0.0, 1.0)]).unwrap();
        let text = w.to_canonical_json();
        assert!(text.contains("\"privacy\": \"public\""));
        assert!(text.contains("\"rt\": \"soft\""));
        assert!(text.contains("\"accuracy\": \"accurate\""));
    }

    #[test]
    fn deadlines_follow_slack_ranges() {
        let p = BuiltinWorkload::ETransport.params(&GenParams::default());
        let w: WorkloadSpec<f64> = generate_workload("e-transport", &p, 3).unwrap();
        for t in w.tasks() {
            assert!((50.0..=500.0).contains(&t.size));
            let slack = (t.deadline - t.arrival) * p.reference_speed / t.size;
            let [lo, hi] = match t.rt {
                RealTimeClass::Hard => p.slack_hard,
                RealTimeClass::Firm => p.slack_firm,
                RealTimeClass::Soft => p.slack_soft,
            };
            assert!(slack >= lo - 1e-9 && slack <= hi + 1e-9, "slack {slack}");
            assert_eq!(t.arrival, 0.0);
        }
    }
}
