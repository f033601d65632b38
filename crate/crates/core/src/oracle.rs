//! Exhaustive placement search on tiny instances.
//!
//! Every per-task choice of layer and execution mode is enumerated
//! depth-first in arrival order and each complete vector is executed by the
//! engine's [`Simulator`] and scored with [`summarize_outcomes`]. Within the
//! RSU and cloud pools the least busy node is used, as PVEC does; for pools of
//! identical nodes that choice is never worse than any other.
//!
//! Choices are visited in lexicographic order (user layer < RSU < cloud, then
//! ACP < AXP, then unshielded < shielded) and only a strictly better QoS
//! replaces the incumbent, so ties resolve to the smallest vector.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infrastructure::{CapacityLedger, Layer, Platform};
use crate::metrics::{summarize_outcomes, MetricsConfig};
use crate::policy::{Assignment, ExecutionMode, Policy};
use crate::scalar::Scalar;
use crate::simengine::{simulate, SimOptions, Simulator, TaskOutcome};
use crate::workload::{AccuracyClass, PrivacyClass, TaskSpec, WorkloadSpec};

pub const ORACLE_MAX_TASKS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<F> {
    pub best_qos: F,
    pub best_assignment: Vec<Assignment>,
    /// Tasks of the best vector that pay the privacy surcharge (shielded
    /// search only).
    pub shielded: Vec<u64>,
    /// Number of complete assignment vectors scored.
    pub evaluated: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Choice {
    layer: Layer,
    mode: ExecutionMode,
    shield: bool,
}

struct Search<'a, F: Scalar> {
    platform: &'a Platform<F>,
    tasks: &'a [TaskSpec<F>],
    choices: Vec<Vec<Choice>>,
    bc_overhead: F,
    metrics: &'a MetricsConfig<F>,
    outcomes: Vec<TaskOutcome<F>>,
    path: Vec<(Assignment, bool)>,
    best: Option<(F, Vec<(Assignment, bool)>)>,
    evaluated: u64,
}

fn choices_for<F: Scalar>(
    task: &TaskSpec<F>,
    platform: &Platform<F>,
    honor_privacy: bool,
    shielding: bool,
) -> Vec<Choice> {
    let layers: &[Layer] = match (honor_privacy, task.privacy) {
        (true, PrivacyClass::Private) => &[Layer::UserLayer],
        (true, PrivacyClass::Restricted) => &[Layer::UserLayer, Layer::Cloud],
        _ => &Layer::ALL,
    };
    let modes: &[ExecutionMode] = match task.accuracy {
        AccuracyClass::Accurate => &[ExecutionMode::AccurateProcessing],
        AccuracyClass::Approximate => &[
            ExecutionMode::AccurateProcessing,
            ExecutionMode::ApproximateProcessing,
        ],
    };
    // a shield only matters where placement alone does not already earn full
    // privacy credit
    let shield_helps = |layer| match layer {
        Layer::UserLayer => false,
        Layer::Rsu => true,
        Layer::Cloud => platform.k_cloud() < F::one(),
    };
    let mut out = Vec::new();
    for &layer in layers {
        for &mode in modes {
            out.push(Choice {
                layer,
                mode,
                shield: false,
            });
            if shielding && task.privacy != PrivacyClass::Public && shield_helps(layer) {
                out.push(Choice {
                    layer,
                    mode,
                    shield: true,
                });
            }
        }
    }
    out
}

impl<F: Scalar> Search<'_, F> {
    fn descend(&mut self, depth: usize, sim: &Simulator<'_, F>) -> Result<()> {
        if depth == self.tasks.len() {
            return self.score();
        }
        let task = &self.tasks[depth];
        for i in 0..self.choices[depth].len() {
            let choice = self.choices[depth][i];
            let node_id = match choice.layer {
                Layer::UserLayer => self.platform.obu_of(task.owner),
                pooled => sim.ledger().least_busy(pooled).expect("pool exists"),
            };
            let assignment = Assignment {
                task_id: task.id,
                layer: choice.layer,
                node_id,
                mode: choice.mode,
            };
            let mut next = sim.clone();
            let surcharge = choice.shield.then_some(self.bc_overhead);
            let outcome = next.execute(task, &assignment, surcharge)?;
            self.outcomes.push(outcome);
            self.path.push((assignment, choice.shield));
            self.descend(depth + 1, &next)?;
            self.path.pop();
            self.outcomes.pop();
        }
        Ok(())
    }

    fn score(&mut self) -> Result<()> {
        self.evaluated += 1;
        let report = summarize_outcomes(
            &self.outcomes,
            self.platform.srp(),
            self.platform.k_cloud(),
            self.metrics,
        )?;
        if self.best.as_ref().is_none_or(|(q, _)| report.qos > *q) {
            self.best = Some((report.qos, self.path.clone()));
        }
        Ok(())
    }
}

fn search<F: Scalar>(
    platform: &Platform<F>,
    workload: &WorkloadSpec<F>,
    honor_privacy: bool,
    shielding: bool,
    sim: &SimOptions<F>,
    metrics: &MetricsConfig<F>,
) -> Result<OracleResult<F>> {
    if workload.is_empty() {
        return Err(Error::OracleEmpty);
    }
    if workload.len() > ORACLE_MAX_TASKS {
        return Err(Error::OracleTooLarge {
            tasks: workload.len(),
            cap: ORACLE_MAX_TASKS,
        });
    }
    sim.validate()?;
    metrics.validate()?;
    crate::simengine::check_owners(platform, workload)?;
    let tasks = workload.tasks();
    let mut state = Search {
        platform,
        tasks,
        choices: tasks
            .iter()
            .map(|t| choices_for(t, platform, honor_privacy, shielding))
            .collect(),
        bc_overhead: sim.bc_overhead,
        metrics,
        outcomes: Vec::with_capacity(tasks.len()),
        path: Vec::with_capacity(tasks.len()),
        best: None,
        evaluated: 0,
    };
    state.descend(0, &Simulator::new(platform, sim.approx_fraction))?;
    let (best_qos, path) = state.best.expect("non-empty instance has a vector");
    Ok(OracleResult {
        best_qos,
        best_assignment: path.iter().map(|(a, _)| *a).collect(),
        shielded: path
            .iter()
            .filter(|(_, s)| *s)
            .map(|(a, _)| a.task_id)
            .collect(),
        evaluated: state.evaluated,
    })
}

/// Best QoS over every per-task (layer, mode) vector. With `honor_privacy`,
/// Private tasks stay on the owner's OBU and Restricted tasks avoid RSUs.
pub fn brute_force_best<F: Scalar>(
    platform: &Platform<F>,
    workload: &WorkloadSpec<F>,
    honor_privacy: bool,
    sim: &SimOptions<F>,
    metrics: &MetricsConfig<F>,
) -> Result<OracleResult<F>> {
    search(platform, workload, honor_privacy, false, sim, metrics)
}

/// As [`brute_force_best`], but non-Public tasks may additionally buy full
/// privacy credit on the RSU (or on a cloud with `K < 1`) by paying the
/// consensus overhead `sim.bc_overhead`, the mechanism the LSBTS-style
/// baseline uses. Its optimum bounds that baseline as well.
pub fn brute_force_best_shielded<F: Scalar>(
    platform: &Platform<F>,
    workload: &WorkloadSpec<F>,
    honor_privacy: bool,
    sim: &SimOptions<F>,
    metrics: &MetricsConfig<F>,
) -> Result<OracleResult<F>> {
    search(platform, workload, honor_privacy, true, sim, metrics)
}

/// Replays a precomputed assignment vector through the engine.
#[derive(Debug, Clone)]
pub struct FixedPolicy<F> {
    assignments: Vec<Assignment>,
    shielded: BTreeSet<u64>,
    bc_overhead: F,
    next: usize,
}

impl<F: Scalar> FixedPolicy<F> {
    pub fn new(assignments: Vec<Assignment>, shielded: impl IntoIterator<Item = u64>, bc_overhead: F) -> Self {
        Self {
            assignments,
            shielded: shielded.into_iter().collect(),
            bc_overhead,
            next: 0,
        }
    }

    pub fn from_result(result: &OracleResult<F>, bc_overhead: F) -> Self {
        Self::new(result.best_assignment.clone(), result.shielded.iter().copied(), bc_overhead)
    }
}

impl<F: Scalar> Policy<F> for FixedPolicy<F> {
    fn assign(
        &mut self,
        task: &TaskSpec<F>,
        _platform: &Platform<F>,
        _ledger: &CapacityLedger<F>,
        _t: F,
    ) -> Assignment {
        let a = self.assignments[self.next];
        assert_eq!(a.task_id, task.id, "fixed assignment vector out of order");
        self.next += 1;
        a
    }

    fn privacy_surcharge(&self, task: &TaskSpec<F>) -> Option<F> {
        self.shielded.contains(&task.id).then_some(self.bc_overhead)
    }
}

/// QoS of replaying `result`'s best vector through [`simulate`].
pub fn replay_qos<F: Scalar>(
    platform: &Platform<F>,
    workload: &WorkloadSpec<F>,
    result: &OracleResult<F>,
    sim: &SimOptions<F>,
    metrics: &MetricsConfig<F>,
) -> Result<F> {
    let mut policy = FixedPolicy::from_result(result, sim.bc_overhead);
    let (outcomes, _) = simulate(platform, workload, &mut policy, sim)?;
    Ok(summarize_outcomes(&outcomes, platform.srp(), platform.k_cloud(), metrics)?.qos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infrastructure::{build_platform, PlatformConfig};
    use crate::policy::{pvec_assign, PolicyKind};
    use crate::simengine::run;
    use crate::workload::RealTimeClass;

    fn platform() -> Platform<f64> {
        build_platform(&PlatformConfig {
            vehicles: 2,
            rsu_count: 1,
            ..PlatformConfig::default()
        })
        .unwrap()
    }

    fn task(id: u64, privacy: PrivacyClass, accuracy: AccuracyClass) -> TaskSpec<f64> {
        TaskSpec {
            id,
            owner: (id % 2) as usize,
            size: 80.0,
            privacy,
            rt: RealTimeClass::Firm,
            accuracy,
            arrival: 0.0,
            deadline: 4.0,
        }
    }

    #[test]
    fn single_private_task_matches_pvec() {
        let p = platform();
        let t = task(0, PrivacyClass::Private, AccuracyClass::Accurate);
        let w = WorkloadSpec::new("one", vec![t.clone()]).unwrap();
        let r = brute_force_best(&p, &w, true, &SimOptions::default(), &MetricsConfig::default()).unwrap();
        assert_eq!(r.evaluated, 1);
        let pvec = pvec_assign(&t, &p, &CapacityLedger::new(&p), 0.0);
        assert_eq!(r.best_assignment, vec![pvec]);
    }

    #[test]
    fn empty_and_oversized_instances_are_rejected() {
        let p = platform();
        let sim = SimOptions::default();
        let m = MetricsConfig::default();
        let empty = WorkloadSpec::<f64>::new("e", vec![]).unwrap();
        assert!(matches!(brute_force_best(&p, &empty, true, &sim, &m), Err(Error::OracleEmpty)));
        let big = WorkloadSpec::new(
            "b",
            (0..13).map(|i| task(i, PrivacyClass::Public, AccuracyClass::Accurate)).collect(),
        )
        .unwrap();
        let err = brute_force_best(&p, &big, true, &sim, &m).unwrap_err();
        assert!(err.to_string().contains("cap is 12"), "{err}");
    }

    #[test]
    fn evaluated_counts_every_vector() {
        let p = platform();
        let w = WorkloadSpec::new(
            "mix",
            vec![
                task(0, PrivacyClass::Private, AccuracyClass::Approximate),
                task(1, PrivacyClass::Restricted, AccuracyClass::Accurate),
                task(2, PrivacyClass::Public, AccuracyClass::Approximate),
            ],
        )
        .unwrap();
        let sim = SimOptions::default();
        let m = MetricsConfig::default();
        // honoring privacy: 2 · 2 · 6; ignoring it: 6 · 3 · 6
        assert_eq!(brute_force_best(&p, &w, true, &sim, &m).unwrap().evaluated, 24);
        assert_eq!(brute_force_best(&p, &w, false, &sim, &m).unwrap().evaluated, 108);
        // shields add an RSU option for each mode of the two non-Public tasks
        assert_eq!(brute_force_best_shielded(&p, &w, false, &sim, &m).unwrap().evaluated, 8 * 4 * 6);
    }

    #[test]
    fn best_vector_replays_exactly_and_dominates_pvec() {
        let p = platform();
        let w = WorkloadSpec::new(
            "mix",
            vec![
                task(0, PrivacyClass::Private, AccuracyClass::Approximate),
                task(1, PrivacyClass::Restricted, AccuracyClass::Accurate),
                task(2, PrivacyClass::Public, AccuracyClass::Approximate),
                task(3, PrivacyClass::Public, AccuracyClass::Accurate),
                task(4, PrivacyClass::Private, AccuracyClass::Accurate),
            ],
        )
        .unwrap();
        let sim = SimOptions::default();
        let m = MetricsConfig::default();
        let r = brute_force_best(&p, &w, false, &sim, &m).unwrap();
        assert_eq!(replay_qos(&p, &w, &r, &sim, &m).unwrap(), r.best_qos);
        let trace = run(&p, &w, PolicyKind::Pvec, 0, &sim).unwrap();
        let pvec = crate::metrics::summarize(&trace, &p, &m).unwrap();
        assert!(r.best_qos >= pvec.qos);
    }
}
