//! Deterministic executor: dispatches tasks in `(arrival, id)` order to a
//! policy, queues them FIFO on the chosen node's earliest-free core and
//! records one [`TaskOutcome`] per task.
//!
//! Timing of a task placed on a node with one-way latency `L`:
//!
//! ```text
//! start   = max(arrival, earliest core free time)
//! release = start + processing_time          (core busy interval)
//! finish  = release + 2 L (+ privacy surcharge)
//! ```

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infrastructure::{CapacityLedger, Layer, NodeSpec, Platform};
use crate::policy::{make_policy, Assignment, ExecutionMode, Policy, PolicyKind};
use crate::scalar::{Scalar, SECONDS_PER_HOUR};
use crate::workload::{RealTimeClass, TaskSpec, WorkloadSpec};

/// Seconds of compute for `task` on one core of `node`. Approximate mode
/// shrinks the work to `approx_fraction` of the task size.
pub fn processing_time<F: Scalar>(
    task: &TaskSpec<F>,
    node: &NodeSpec<F>,
    mode: ExecutionMode,
    approx_fraction: F,
) -> F {
    effective_size(task, mode, approx_fraction) / node.speed
}

pub fn effective_size<F: Scalar>(task: &TaskSpec<F>, mode: ExecutionMode, approx_fraction: F) -> F {
    match mode {
        ExecutionMode::AccurateProcessing => task.size,
        ExecutionMode::ApproximateProcessing => task.size * approx_fraction,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "F: Scalar")]
pub struct SimOptions<F> {
    /// Share of the work an approximate execution still performs.
    pub approx_fraction: F,
    /// Consensus latency the LSBTS-style baseline adds to non-Public tasks.
    pub bc_overhead: F,
    /// Record the event log.
    pub trace: bool,
}

impl<F: Scalar> Default for SimOptions<F> {
    fn default() -> Self {
        Self {
            approx_fraction: F::lit(0.1),
            bc_overhead: F::lit(0.2),
            trace: false,
        }
    }
}

impl<F: Scalar> SimOptions<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.approx_fraction > F::zero() && self.approx_fraction <= F::one()) {
            return Err(Error::InvalidPlatform {
                field: "approx_fraction",
                reason: format!("must lie in (0, 1], got {}", self.approx_fraction),
            });
        }
        if !(self.bc_overhead.is_finite() && self.bc_overhead >= F::zero()) {
            return Err(Error::InvalidPlatform {
                field: "bc_overhead",
                reason: format!("must be >= 0, got {}", self.bc_overhead),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome<F> {
    pub task_id: u64,
    pub layer: Layer,
    pub node_id: usize,
    pub core: usize,
    pub mode: ExecutionMode,
    pub rt: RealTimeClass,
    /// Task size in work units (before approximation).
    pub size: F,
    /// Processing start on the core.
    pub start: F,
    /// End of the core's busy interval.
    pub release: F,
    /// Result delivered to the vehicle.
    pub finish: F,
    /// Pure compute time, no queueing or transfer.
    pub processing_hours: F,
    pub deadline_met: bool,
    pub privacy_preserved: bool,
    /// Privacy credited by the policy's own mechanism rather than by placement.
    pub shielded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Release { node: usize, core: usize },
    Complete { deadline_met: bool },
    Arrive,
    Start { node: usize, core: usize },
}

impl EventKind {
    fn rank(&self) -> u8 {
        match self {
            EventKind::Release { .. } => 0,
            EventKind::Complete { .. } => 1,
            EventKind::Arrive => 2,
            EventKind::Start { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event<F> {
    pub time: F,
    pub task_id: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport<F> {
    pub policy: PolicyKind,
    pub workload: String,
    pub seed: u64,
    pub outcomes: Vec<TaskOutcome<F>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub events: Vec<Event<F>>,
}

/// Incremental executor state: place tasks one at a time, in arrival order.
#[derive(Debug, Clone)]
pub struct Simulator<'a, F> {
    platform: &'a Platform<F>,
    ledger: CapacityLedger<F>,
    approx_fraction: F,
}

impl<'a, F: Scalar> Simulator<'a, F> {
    pub fn new(platform: &'a Platform<F>, approx_fraction: F) -> Self {
        Self {
            platform,
            ledger: CapacityLedger::new(platform),
            approx_fraction,
        }
    }

    pub fn ledger(&self) -> &CapacityLedger<F> {
        &self.ledger
    }

    /// Executes `task` per `assignment`. `surcharge` is the policy's privacy
    /// overhead, if any.
    pub fn execute(
        &mut self,
        task: &TaskSpec<F>,
        assignment: &Assignment,
        surcharge: Option<F>,
    ) -> Result<TaskOutcome<F>> {
        let invalid = |reason: &str| Error::InvalidAssignment {
            task_id: task.id,
            node_id: assignment.node_id,
            reason: reason.to_string(),
        };
        let node = self
            .platform
            .nodes()
            .get(assignment.node_id)
            .ok_or_else(|| invalid("no such node"))?;
        if node.layer != assignment.layer {
            return Err(invalid("node layer differs from assigned layer"));
        }
        if node.layer == Layer::UserLayer && node.vehicle != Some(task.owner) {
            return Err(invalid("OBU does not belong to the task owner"));
        }
        if assignment.mode == ExecutionMode::ApproximateProcessing
            && task.accuracy == crate::workload::AccuracyClass::Accurate
        {
            return Err(invalid("accurate task assigned approximate processing"));
        }

        let duration = processing_time(task, node, assignment.mode, self.approx_fraction);
        let work = effective_size(task, assignment.mode, self.approx_fraction);
        let (_, start) = self.ledger.next_slot(node.id, task.arrival);
        let core = self.ledger.admit(node.id, start, duration, work)?;
        let release = start + duration;
        let two = F::lit(2.0);
        let finish = release + two * node.link_latency + surcharge.unwrap_or_else(F::zero);
        let shielded = surcharge.is_some();
        Ok(TaskOutcome {
            task_id: task.id,
            layer: node.layer,
            node_id: node.id,
            core,
            mode: assignment.mode,
            rt: task.rt,
            size: task.size,
            start,
            release,
            finish,
            processing_hours: duration / F::lit(SECONDS_PER_HOUR),
            deadline_met: finish <= task.deadline,
            privacy_preserved: shielded || node.layer != Layer::Rsu,
            shielded,
        })
    }
}

pub fn check_owners<F: Scalar>(platform: &Platform<F>, workload: &WorkloadSpec<F>) -> Result<()> {
    let vehicles = platform.vehicles();
    match workload.tasks().iter().find(|t| t.owner >= vehicles) {
        Some(t) => Err(Error::OwnerOutOfRange {
            task_id: t.id,
            owner: t.owner,
            vehicles,
        }),
        None => Ok(()),
    }
}

/// Runs `workload` against `platform` with an arbitrary policy. Returns the
/// outcomes in dispatch order and, when `opts.trace` is set, the event log.
pub fn simulate<F: Scalar>(
    platform: &Platform<F>,
    workload: &WorkloadSpec<F>,
    policy: &mut dyn Policy<F>,
    opts: &SimOptions<F>,
) -> Result<(Vec<TaskOutcome<F>>, Vec<Event<F>>)> {
    opts.validate()?;
    check_owners(platform, workload)?;
    let mut sim = Simulator::new(platform, opts.approx_fraction);
    let mut outcomes = Vec::with_capacity(workload.len());
    for task in workload.tasks() {
        let assignment = policy.assign(task, platform, sim.ledger(), task.arrival);
        debug_assert_eq!(assignment.task_id, task.id);
        let surcharge = policy.privacy_surcharge(task);
        outcomes.push(sim.execute(task, &assignment, surcharge)?);
    }
    let events = if opts.trace {
        event_log(workload, &outcomes)
    } else {
        Vec::new()
    };
    Ok((outcomes, events))
}

/// Runs one of the builtin policies. Deterministic in every argument.
pub fn run<F: Scalar>(
    platform: &Platform<F>,
    workload: &WorkloadSpec<F>,
    kind: PolicyKind,
    seed: u64,
    opts: &SimOptions<F>,
) -> Result<TraceReport<F>> {
    let mut policy = make_policy(kind, seed, opts.bc_overhead);
    let (outcomes, events) = simulate(platform, workload, policy.as_mut(), opts)?;
    Ok(TraceReport {
        policy: kind,
        workload: workload.name.clone(),
        seed,
        outcomes,
        events,
    })
}

fn event_log<F: Scalar>(workload: &WorkloadSpec<F>, outcomes: &[TaskOutcome<F>]) -> Vec<Event<F>> {
    let mut events = Vec::with_capacity(outcomes.len() * 4);
    for (task, o) in workload.tasks().iter().zip(outcomes) {
        let (node, core) = (o.node_id, o.core);
        events.push(Event {
            time: task.arrival,
            task_id: task.id,
            kind: EventKind::Arrive,
        });
        events.push(Event {
            time: o.start,
            task_id: task.id,
            kind: EventKind::Start { node, core },
        });
        events.push(Event {
            time: o.release,
            task_id: task.id,
            kind: EventKind::Release { node, core },
        });
        events.push(Event {
            time: o.finish,
            task_id: task.id,
            kind: EventKind::Complete {
                deadline_met: o.deadline_met,
            },
        });
    }
    events.sort_by(|a, b| {
        a.time
            .partial_cmp(&b.time)
            .unwrap_or(Ordering::Equal)
            .then(a.kind.rank().cmp(&b.kind.rank()))
            .then(a.task_id.cmp(&b.task_id))
    });
    events
}

/// Replays an event log and returns the peak number of simultaneously running
/// tasks per node.
pub fn peak_concurrency<F: Scalar>(events: &[Event<F>], nodes: usize) -> Vec<usize> {
    let mut running = vec![0usize; nodes];
    let mut peak = vec![0usize; nodes];
    for event in events {
        match event.kind {
            EventKind::Start { node, .. } => {
                running[node] += 1;
                peak[node] = peak[node].max(running[node]);
            }
            EventKind::Release { node, .. } => running[node] -= 1,
            _ => {}
        }
    }
    peak
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infrastructure::{build_platform, PlatformConfig};
    use crate::workload::{AccuracyClass, PrivacyClass};

    fn platform(vehicles: usize) -> Platform<f64> {
        build_platform(&PlatformConfig {
            vehicles,
            ..PlatformConfig::default()
        })
        .unwrap()
    }

    fn private_task(id: u64, size: f64) -> TaskSpec<f64> {
        TaskSpec {
            id,
            owner: 0,
            size,
            privacy: PrivacyClass::Private,
            rt: RealTimeClass::Hard,
            accuracy: AccuracyClass::Accurate,
            arrival: 0.0,
            deadline: 10.0,
        }
    }

    fn node(speed: f64) -> NodeSpec<f64> {
        NodeSpec {
            id: 0,
            layer: Layer::Rsu,
            speed,
            cores: 1,
            link_latency: 0.0,
            vehicle: None,
        }
    }

    #[test]
    fn processing_time_examples() {
        let t = private_task(0, 100.0);
        let acp = ExecutionMode::AccurateProcessing;
        let axp = ExecutionMode::ApproximateProcessing;
        assert_eq!(processing_time(&t, &node(50.0), acp, 0.1), 2.0);
        assert!((processing_time(&t, &node(50.0), axp, 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(processing_time(&t, &node(50.0), axp, 1.0), 2.0);
    }

    #[test]
    fn single_task_on_owner_obu() {
        let p = platform(1);
        let w = WorkloadSpec::new("one", vec![private_task(0, 25.0)]).unwrap();
        let r = run(&p, &w, PolicyKind::Pvec, 0, &SimOptions::default()).unwrap();
        let o = &r.outcomes[0];
        assert_eq!(o.layer, Layer::UserLayer);
        assert_eq!(o.node_id, p.obu_of(0));
        assert_eq!(o.start, 0.0);
        assert_eq!(o.finish, 1.0);
        assert_eq!(o.processing_hours * 3600.0, 1.0);
        assert!(o.deadline_met && o.privacy_preserved);
    }

    #[test]
    fn same_owner_tasks_serialize_fifo() {
        let p = platform(1);
        let w = WorkloadSpec::new("two", vec![private_task(0, 50.0), private_task(1, 25.0)]).unwrap();
        let r = run(&p, &w, PolicyKind::Pvec, 0, &SimOptions::default()).unwrap();
        assert_eq!(r.outcomes[0].release, 2.0);
        assert_eq!(r.outcomes[1].start, 2.0);
        assert_eq!(r.outcomes[1].finish, 3.0);
    }

    #[test]
    fn empty_workload_yields_empty_trace() {
        let p = platform(1);
        let w = WorkloadSpec::<f64>::new("empty", vec![]).unwrap();
        let r = run(&p, &w, PolicyKind::Random, 3, &SimOptions::default()).unwrap();
        assert!(r.outcomes.is_empty());
    }

    #[test]
    fn owner_out_of_range_is_a_config_error() {
        let p = platform(1);
        let t = TaskSpec {
            owner: 4,
            ..private_task(0, 10.0)
        };
        let w = WorkloadSpec::new("bad", vec![t]).unwrap();
        let err = run(&p, &w, PolicyKind::Pvec, 0, &SimOptions::default()).unwrap_err();
        assert!(matches!(err, Error::OwnerOutOfRange { owner: 4, vehicles: 1, .. }));
    }

    #[test]
    fn cloud_latency_counted_both_ways() {
        let p = platform(1);
        let t = TaskSpec {
            privacy: PrivacyClass::Public,
            rt: RealTimeClass::Soft,
            ..private_task(0, 200.0)
        };
        let w = WorkloadSpec::new("c", vec![t]).unwrap();
        let r = run(&p, &w, PolicyKind::Pvec, 0, &SimOptions::default()).unwrap();
        let o = &r.outcomes[0];
        assert_eq!(o.layer, Layer::Cloud);
        assert_eq!(o.release, 1.0);
        assert_eq!(o.finish, 2.0);
    }

    #[test]
    fn lsbts_surcharge_and_shield() {
        let p = platform(1);
        let t = TaskSpec {
            deadline: 0.4,
            ..private_task(0, 50.0)
        };
        let w = WorkloadSpec::new("l", vec![t]).unwrap();
        let r = run(&p, &w, PolicyKind::Lsbts, 0, &SimOptions::default()).unwrap();
        let o = &r.outcomes[0];
        // only the cloud estimate (0.25 s) fits 0.4 s; transfers and the surcharge then miss it
        assert_eq!(o.layer, Layer::Cloud);
        assert!((o.finish - 1.45).abs() < 1e-12);
        assert!(o.shielded && o.privacy_preserved && !o.deadline_met);
    }

    #[test]
    fn executor_rejects_foreign_obu() {
        let p = platform(2);
        let mut sim = Simulator::new(&p, 0.1);
        let a = Assignment {
            task_id: 0,
            layer: Layer::UserLayer,
            node_id: p.obu_of(1),
            mode: ExecutionMode::AccurateProcessing,
        };
        assert!(matches!(
            sim.execute(&private_task(0, 10.0), &a, None),
            Err(Error::InvalidAssignment { .. })
        ));
    }

    #[test]
    fn event_log_is_time_ordered_and_within_capacity() {
        let p = platform(2);
        let tasks: Vec<_> = (0..6)
            .map(|i| TaskSpec {
                owner: (i % 2) as usize,
                ..private_task(i, 30.0 + i as f64)
            })
            .collect();
        let w = WorkloadSpec::new("e", tasks).unwrap();
        let opts = SimOptions {
            trace: true,
            ..SimOptions::default()
        };
        let r = run(&p, &w, PolicyKind::Pvec, 0, &opts).unwrap();
        assert_eq!(r.events.len(), 24);
        assert!(r.events.windows(2).all(|w| w[0].time <= w[1].time));
        let peak = peak_concurrency(&r.events, p.nodes().len());
        assert_eq!(peak[p.obu_of(0)], 1);
        assert_eq!(peak[p.obu_of(1)], 1);
    }
}
