//! Shared fixtures: small random instances and a metric recomputation that
//! works from the raw task and node records instead of the metrics module.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vecsim_core::{
    build_platform, generate_workload, AccuracyClass, ExecutionMode, GenParams, Layer, Platform, PlatformConfig,
    PrivacyClass, TaskOutcome, WorkloadSpec,
};

pub struct Reference {
    pub cost: f64,
    pub nmd: usize,
    pub privacy: f64,
    pub qor: f64,
    pub qos: f64,
    pub layer_counts: [usize; 3],
}

/// Recomputes the headline metrics from first principles: cost from task size
/// and node speed, misses from the workload deadlines, privacy and result
/// quality from per-task credits.
pub fn reference_metrics(
    platform: &Platform,
    workload: &WorkloadSpec,
    outcomes: &[TaskOutcome],
    approx_fraction: f64,
    approx_accuracy: f64,
) -> Reference {
    let tasks: HashMap<u64, _> = workload.tasks().iter().map(|t| (t.id, t)).collect();
    let mut seconds_on_cloud = 0.0;
    let mut nmd = 0;
    let mut privacy_credit = 0.0;
    let mut accuracy = 0.0;
    let mut layer_counts = [0; 3];
    for o in outcomes {
        let task = tasks[&o.task_id];
        let node = &platform.nodes()[o.node_id];
        let work = match o.mode {
            ExecutionMode::ApproximateProcessing => task.size * approx_fraction,
            ExecutionMode::AccurateProcessing => task.size,
        };
        if node.layer == Layer::Cloud {
            seconds_on_cloud += work / node.speed;
        }
        if o.finish > task.deadline {
            nmd += 1;
        }
        privacy_credit += match (node.layer, o.shielded) {
            (Layer::UserLayer, _) | (_, true) => 1.0,
            (Layer::Rsu, false) => 0.0,
            (Layer::Cloud, false) => platform.k_cloud(),
        };
        accuracy += match o.mode {
            ExecutionMode::AccurateProcessing => 1.0,
            ExecutionMode::ApproximateProcessing => approx_accuracy,
        };
        layer_counts[match node.layer {
            Layer::UserLayer => 0,
            Layer::Rsu => 1,
            Layer::Cloud => 2,
        }] += 1;
    }
    let n = outcomes.len() as f64;
    let cost = seconds_on_cloud / 3600.0 * platform.srp();
    let privacy = privacy_credit / n;
    let qor = accuracy / n;
    let qos = privacy * qor / ((1.0 + cost) * (1.0 + nmd as f64));
    Reference {
        cost,
        nmd,
        privacy,
        qor,
        qos,
        layer_counts,
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// A small contended platform and a random workload of `1..=max_tasks` tasks.
pub fn small_instance(rng: &mut ChaCha8Rng, max_tasks: usize) -> (Platform, WorkloadSpec) {
    let vehicles = rng.gen_range(1..=3);
    let platform = build_platform(&PlatformConfig {
        vehicles,
        rsu_count: rng.gen_range(1..=2),
        rsu_cores: rng.gen_range(1..=2),
        cloud_cores: rng.gen_range(1..=2),
        k_cloud: if rng.gen_bool(0.7) { 1.0 } else { 0.5 },
        ..PlatformConfig::default()
    })
    .unwrap();
    let params = GenParams {
        tasks: rng.gen_range(1..=max_tasks),
        vehicles,
        private_share: rng.gen_range(0.0..0.5),
        restricted_share: Some(rng.gen_range(0.0..0.3)),
        hard_share: rng.gen_range(0.0..0.5),
        approximate_share: rng.gen_range(0.0..1.0),
        arrival_window: if rng.gen_bool(0.5) { 0.0 } else { 5.0 },
        ..GenParams::default()
    };
    let workload = generate_workload("small", &params, rng.gen()).unwrap();
    (platform, workload)
}

/// Number of vectors the unrestricted search with the consensus option visits.
pub fn open_search_space(platform: &Platform, workload: &WorkloadSpec) -> u64 {
    workload
        .tasks()
        .iter()
        .map(|t| {
            let modes = match t.accuracy {
                AccuracyClass::Accurate => 1,
                AccuracyClass::Approximate => 2,
            };
            let shields = match t.privacy {
                PrivacyClass::Public => 0,
                _ if platform.k_cloud() < 1.0 => 2,
                _ => 1,
            };
            modes * (3 + shields)
        })
        .product()
}
