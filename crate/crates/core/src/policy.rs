//! Placement policies: PVEC, a uniform random baseline and an LSBTS-style
//! linear-search baseline.
//!
//! A policy maps one task, seen at its arrival instant together with the
//! current [`CapacityLedger`], to a node and an execution mode. Queueing on a
//! saturated node is left to the engine.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::infrastructure::{CapacityLedger, Layer, Platform};
use crate::scalar::Scalar;
use crate::simengine::processing_time;
use crate::workload::{AccuracyClass, PrivacyClass, RealTimeClass, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExecutionMode {
    #[serde(rename = "acp")]
    AccurateProcessing,
    #[serde(rename = "axp")]
    ApproximateProcessing,
}

impl ExecutionMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::AccurateProcessing => "acp",
            Self::ApproximateProcessing => "axp",
        }
    }

    /// AXP for tasks that tolerate approximation, ACP otherwise.
    pub fn for_accuracy(accuracy: AccuracyClass) -> Self {
        match accuracy {
            AccuracyClass::Accurate => Self::AccurateProcessing,
            AccuracyClass::Approximate => Self::ApproximateProcessing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub task_id: u64,
    pub layer: Layer,
    pub node_id: usize,
    pub mode: ExecutionMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Pvec,
    Random,
    Lsbts,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [Self::Pvec, Self::Random, Self::Lsbts];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pvec => "pvec",
            Self::Random => "random",
            Self::Lsbts => "lsbts",
        }
    }

    /// Human-facing label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Self::Pvec => "PVEC",
            Self::Random => "Random",
            Self::Lsbts => "LSBTS-style",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown policy `{s}` (valid: pvec, random, lsbts)"))
    }
}

/// An online placement policy.
pub trait Policy<F: Scalar> {
    fn assign(
        &mut self,
        task: &TaskSpec<F>,
        platform: &Platform<F>,
        ledger: &CapacityLedger<F>,
        t: F,
    ) -> Assignment;

    /// Extra end-to-end latency charged to `task` by the policy's privacy
    /// mechanism. A task that pays it counts as privacy-preserved wherever it
    /// runs.
    fn privacy_surcharge(&self, _task: &TaskSpec<F>) -> Option<F> {
        None
    }
}

fn target<F: Scalar>(
    task: &TaskSpec<F>,
    platform: &Platform<F>,
    ledger: &CapacityLedger<F>,
    layer: Layer,
    mode: ExecutionMode,
) -> Assignment {
    let node_id = match layer {
        Layer::UserLayer => platform.obu_of(task.owner),
        pooled => ledger
            .least_busy(pooled)
            .expect("validated platforms have RSU and cloud pools"),
    };
    Assignment {
        task_id: task.id,
        layer,
        node_id,
        mode,
    }
}

/// Layer PVEC picks for a task; the only state-dependent cell is
/// Restricted × Firm, which uses the owner's OBU only when it is idle now.
pub fn pvec_layer(privacy: PrivacyClass, rt: RealTimeClass, owner_obu_available: bool) -> Layer {
    use PrivacyClass::*;
    use RealTimeClass::*;
    match (privacy, rt) {
        (Private, _) => Layer::UserLayer,
        (Restricted, Hard) => Layer::UserLayer,
        (Restricted, Firm) if owner_obu_available => Layer::UserLayer,
        (Restricted, Firm) => Layer::Cloud,
        (Restricted, Soft) => Layer::Cloud,
        (Public, Hard | Firm) => Layer::Rsu,
        (Public, Soft) => Layer::Cloud,
    }
}

/// PVEC decision table. The mode follows the accuracy class in every cell.
pub fn pvec_assign<F: Scalar>(
    task: &TaskSpec<F>,
    platform: &Platform<F>,
    ledger: &CapacityLedger<F>,
    t: F,
) -> Assignment {
    let obu_free = task.privacy == PrivacyClass::Restricted
        && task.rt == RealTimeClass::Firm
        && ledger.available(Layer::UserLayer, Some(task.owner), t);
    let layer = pvec_layer(task.privacy, task.rt, obu_free);
    target(task, platform, ledger, layer, ExecutionMode::for_accuracy(task.accuracy))
}

/// Uniform layer choice among the owner's OBU, the RSU pool and the cloud
/// pool, then a uniform node within the pool. Always accurate.
pub fn random_assign<F: Scalar, R: Rng>(
    task: &TaskSpec<F>,
    platform: &Platform<F>,
    rng: &mut R,
) -> Assignment {
    let layer = Layer::ALL[rng.gen_range(0..3)];
    let node_id = match layer {
        Layer::UserLayer => platform.obu_of(task.owner),
        Layer::Rsu => platform.rsus()[rng.gen_range(0..platform.rsus().len())],
        Layer::Cloud => platform.clouds()[rng.gen_range(0..platform.clouds().len())],
    };
    Assignment {
        task_id: task.id,
        layer,
        node_id,
        mode: ExecutionMode::AccurateProcessing,
    }
}

/// Linear search over the owner's OBU, the RSUs by ascending id and the cloud
/// nodes: the first node whose queue wait plus processing time meets the
/// deadline wins, otherwise the least busy cloud node. Always accurate.
pub fn lsbts_assign<F: Scalar>(
    task: &TaskSpec<F>,
    platform: &Platform<F>,
    ledger: &CapacityLedger<F>,
    t: F,
) -> Assignment {
    let mode = ExecutionMode::AccurateProcessing;
    let order = std::iter::once(platform.obu_of(task.owner))
        .chain(platform.rsus().iter().copied())
        .chain(platform.clouds().iter().copied());
    for node_id in order {
        let node = platform.node(node_id);
        let (_, start) = ledger.next_slot(node_id, t);
        let completion = start + processing_time(task, node, mode, F::one());
        if completion <= task.deadline {
            return Assignment {
                task_id: task.id,
                layer: node.layer,
                node_id,
                mode,
            };
        }
    }
    target(task, platform, ledger, Layer::Cloud, mode)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Pvec;

impl<F: Scalar> Policy<F> for Pvec {
    fn assign(
        &mut self,
        task: &TaskSpec<F>,
        platform: &Platform<F>,
        ledger: &CapacityLedger<F>,
        t: F,
    ) -> Assignment {
        pvec_assign(task, platform, ledger, t)
    }
}

#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    /// Stream 1 of the run seed, so placement draws never alias the workload
    /// generator's stream 0.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Self { rng }
    }
}

impl<F: Scalar> Policy<F> for RandomPolicy {
    fn assign(
        &mut self,
        task: &TaskSpec<F>,
        platform: &Platform<F>,
        _ledger: &CapacityLedger<F>,
        _t: F,
    ) -> Assignment {
        random_assign(task, platform, &mut self.rng)
    }
}

/// Linear-search baseline whose privacy mechanism is modeled as a fixed
/// consensus overhead on every non-Public task.
#[derive(Debug, Clone, Copy)]
pub struct Lsbts<F> {
    pub bc_overhead: F,
}

impl<F: Scalar> Policy<F> for Lsbts<F> {
    fn assign(
        &mut self,
        task: &TaskSpec<F>,
        platform: &Platform<F>,
        ledger: &CapacityLedger<F>,
        t: F,
    ) -> Assignment {
        lsbts_assign(task, platform, ledger, t)
    }

    fn privacy_surcharge(&self, task: &TaskSpec<F>) -> Option<F> {
        (task.privacy != PrivacyClass::Public).then_some(self.bc_overhead)
    }
}

pub fn make_policy<F: Scalar>(kind: PolicyKind, seed: u64, bc_overhead: F) -> Box<dyn Policy<F>> {
    match kind {
        PolicyKind::Pvec => Box::new(Pvec),
        PolicyKind::Random => Box::new(RandomPolicy::new(seed)),
        PolicyKind::Lsbts => Box::new(Lsbts { bc_overhead }),
    }
}
