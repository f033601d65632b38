//! Tiered platform model: per-vehicle OBUs (user layer), a shared RSU pool and
//! a cloud pool, plus the per-core bookkeeping that keeps used capacity within
//! available capacity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    UserLayer,
    Rsu,
    Cloud,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::UserLayer, Layer::Rsu, Layer::Cloud];

    pub(crate) fn index(self) -> usize {
        match self {
            Layer::UserLayer => 0,
            Layer::Rsu => 1,
            Layer::Cloud => 2,
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::UserLayer => "user_layer",
            Layer::Rsu => "rsu",
            Layer::Cloud => "cloud",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec<F> {
    pub id: usize,
    pub layer: Layer,
    /// Work units per second per core.
    pub speed: F,
    pub cores: usize,
    /// One-way transfer delay in seconds.
    pub link_latency: F,
    /// Owning vehicle; present exactly for user-layer nodes.
    pub vehicle: Option<usize>,
}

pub const DEFAULT_VEHICLES: usize = 100;

/// Build parameters for [`Platform`]. Field names double as the keys of the
/// `[platform]` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "F: Scalar")]
pub struct PlatformConfig<F> {
    pub vehicles: usize,
    pub obu_speed: F,
    pub rsu_count: usize,
    pub rsu_speed: F,
    pub rsu_cores: usize,
    pub cloud_speed: F,
    pub cloud_cores: usize,
    /// Unbounded cloud cores.
    pub elastic: bool,
    pub latency_rsu: F,
    pub latency_cloud: F,
    /// Server rent price, dollars per hour.
    pub srp: F,
    /// Cloud privacy coefficient in `[0, 1]`.
    pub k_cloud: F,
}

impl<F: Scalar> Default for PlatformConfig<F> {
    fn default() -> Self {
        Self {
            vehicles: DEFAULT_VEHICLES,
            obu_speed: F::lit(25.0),
            rsu_count: 30,
            rsu_speed: F::lit(100.0),
            rsu_cores: 4,
            cloud_speed: F::lit(200.0),
            cloud_cores: 16,
            elastic: false,
            latency_rsu: F::lit(0.05),
            latency_cloud: F::lit(0.5),
            srp: F::lit(0.959),
            k_cloud: F::one(),
        }
    }
}

/// Immutable node inventory shared read-only by any number of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Platform<F> {
    nodes: Vec<NodeSpec<F>>,
    srp: F,
    k_cloud: F,
    elastic: bool,
    obu_of_vehicle: Vec<usize>,
    rsus: Vec<usize>,
    clouds: Vec<usize>,
}

impl<F: Scalar> Platform<F> {
    /// Validates a hand-built node list. Node ids must equal their position.
    pub fn new(nodes: Vec<NodeSpec<F>>, srp: F, k_cloud: F, elastic: bool) -> Result<Self> {
        let bad = |field, reason: String| Error::InvalidPlatform { field, reason };
        if !(srp.is_finite() && srp >= F::zero()) {
            return Err(bad("srp", format!("must be >= 0, got {srp}")));
        }
        if !(k_cloud >= F::zero() && k_cloud <= F::one()) {
            return Err(bad("k_cloud", format!("must lie in [0, 1], got {k_cloud}")));
        }
        let mut obus: Vec<(usize, usize)> = Vec::new();
        let (mut rsus, mut clouds) = (Vec::new(), Vec::new());
        for (pos, node) in nodes.iter().enumerate() {
            if node.id != pos {
                return Err(bad("id", format!("node at position {pos} has id {}", node.id)));
            }
            if !(node.speed.is_finite() && node.speed > F::zero()) {
                return Err(bad("speed", format!("node {} speed must be > 0", node.id)));
            }
            if node.cores == 0 {
                return Err(bad("cores", format!("node {} needs at least one core", node.id)));
            }
            if !(node.link_latency.is_finite() && node.link_latency >= F::zero()) {
                return Err(bad("link_latency", format!("node {} latency must be >= 0", node.id)));
            }
            match (node.layer, node.vehicle) {
                (Layer::UserLayer, Some(v)) => obus.push((v, node.id)),
                (Layer::UserLayer, None) => {
                    return Err(bad("vehicle", format!("user-layer node {} has no vehicle", node.id)))
                }
                (_, Some(_)) => {
                    return Err(bad("vehicle", format!("node {} is not an OBU but has a vehicle", node.id)))
                }
                (Layer::Rsu, None) => rsus.push(node.id),
                (Layer::Cloud, None) => clouds.push(node.id),
            }
        }
        if clouds.is_empty() {
            return Err(bad("cloud", "platform needs a cloud pool".into()));
        }
        obus.sort_unstable();
        let mut obu_of_vehicle = Vec::with_capacity(obus.len());
        for (expected, (vehicle, node)) in obus.into_iter().enumerate() {
            if vehicle != expected {
                return Err(bad("vehicle", format!("vehicles must be numbered 0..n with one OBU each; saw {vehicle}")));
            }
            obu_of_vehicle.push(node);
        }
        if obu_of_vehicle.is_empty() {
            return Err(bad("vehicles", "platform needs at least one vehicle".into()));
        }
        Ok(Self {
            nodes,
            srp,
            k_cloud,
            elastic,
            obu_of_vehicle,
            rsus,
            clouds,
        })
    }

    pub fn nodes(&self) -> &[NodeSpec<F>] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &NodeSpec<F> {
        &self.nodes[id]
    }

    pub fn srp(&self) -> F {
        self.srp
    }

    pub fn k_cloud(&self) -> F {
        self.k_cloud
    }

    pub fn elastic(&self) -> bool {
        self.elastic
    }

    pub fn vehicles(&self) -> usize {
        self.obu_of_vehicle.len()
    }

    pub fn obu_of(&self, vehicle: usize) -> usize {
        self.obu_of_vehicle[vehicle]
    }

    /// RSU node ids, ascending.
    pub fn rsus(&self) -> &[usize] {
        &self.rsus
    }

    /// Cloud node ids, ascending.
    pub fn clouds(&self) -> &[usize] {
        &self.clouds
    }

    pub fn cloud_cores(&self) -> usize {
        self.clouds.iter().map(|&id| self.nodes[id].cores).sum()
    }
}

/// One OBU per vehicle, `rsu_count` RSUs and a single cloud node.
pub fn build_platform<F: Scalar>(config: &PlatformConfig<F>) -> Result<Platform<F>> {
    let bad = |field, reason: &str| Error::InvalidPlatform {
        field,
        reason: reason.to_string(),
    };
    if config.vehicles == 0 {
        return Err(bad("vehicles", "must be >= 1 (the user layer needs a vehicle)"));
    }
    if config.rsu_count == 0 {
        return Err(bad("rsu_count", "must be >= 1"));
    }
    if config.rsu_cores == 0 {
        return Err(bad("rsu_cores", "must be >= 1"));
    }
    if config.cloud_cores == 0 {
        return Err(bad("cloud_cores", "must be >= 1"));
    }
    for (field, speed) in [
        ("obu_speed", config.obu_speed),
        ("rsu_speed", config.rsu_speed),
        ("cloud_speed", config.cloud_speed),
    ] {
        if !(speed.is_finite() && speed > F::zero()) {
            return Err(bad(field, "must be > 0"));
        }
    }
    for (field, latency) in [("latency_rsu", config.latency_rsu), ("latency_cloud", config.latency_cloud)] {
        if !(latency.is_finite() && latency >= F::zero()) {
            return Err(bad(field, "must be >= 0"));
        }
    }

    let mut nodes = Vec::with_capacity(config.vehicles + config.rsu_count + 1);
    for v in 0..config.vehicles {
        nodes.push(NodeSpec {
            id: nodes.len(),
            layer: Layer::UserLayer,
            speed: config.obu_speed,
            cores: 1,
            link_latency: F::zero(),
            vehicle: Some(v),
        });
    }
    for _ in 0..config.rsu_count {
        nodes.push(NodeSpec {
            id: nodes.len(),
            layer: Layer::Rsu,
            speed: config.rsu_speed,
            cores: config.rsu_cores,
            link_latency: config.latency_rsu,
            vehicle: None,
        });
    }
    nodes.push(NodeSpec {
        id: nodes.len(),
        layer: Layer::Cloud,
        speed: config.cloud_speed,
        cores: config.cloud_cores,
        link_latency: config.latency_cloud,
        vehicle: None,
    });
    Platform::new(nodes, config.srp, config.k_cloud, config.elastic)
}

/// Per-core busy-until times for one simulation run.
///
/// A core is idle at `t` when its busy-until is `<= t`. Admissions only ever
/// move a core's busy-until forward.
#[derive(Debug, Clone)]
pub struct CapacityLedger<F> {
    busy_until: Vec<Vec<F>>,
    busy_total: Vec<F>,
    elastic: Vec<bool>,
    layers: Vec<Layer>,
    obu_of_vehicle: Vec<usize>,
    rsus: Vec<usize>,
    clouds: Vec<usize>,
    layer_work: [F; 3],
}

impl<F: Scalar> CapacityLedger<F> {
    pub fn new(platform: &Platform<F>) -> Self {
        let nodes = platform.nodes();
        Self {
            busy_until: nodes.iter().map(|n| vec![F::zero(); n.cores]).collect(),
            busy_total: vec![F::zero(); nodes.len()],
            elastic: nodes
                .iter()
                .map(|n| platform.elastic() && n.layer == Layer::Cloud)
                .collect(),
            layers: nodes.iter().map(|n| n.layer).collect(),
            obu_of_vehicle: platform.obu_of_vehicle.clone(),
            rsus: platform.rsus.clone(),
            clouds: platform.clouds.clone(),
            layer_work: [F::zero(); 3],
        }
    }

    pub fn busy_until(&self, node: usize) -> &[F] {
        &self.busy_until[node]
    }

    /// Earliest busy-until over the node's cores, ties to the lowest core index.
    pub fn earliest_free(&self, node: usize) -> (usize, F) {
        let mut best = (0, self.busy_until[node][0]);
        for (core, &until) in self.busy_until[node].iter().enumerate().skip(1) {
            if until < best.1 {
                best = (core, until);
            }
        }
        best
    }

    /// Core and start time a task arriving at `t` would get on `node` under
    /// FIFO. Elastic nodes open a fresh core instead of queueing.
    pub fn next_slot(&self, node: usize, t: F) -> (usize, F) {
        let (core, until) = self.earliest_free(node);
        if until <= t {
            (core, t)
        } else if self.elastic[node] {
            (self.busy_until[node].len(), t)
        } else {
            (core, until)
        }
    }

    pub fn node_idle(&self, node: usize, t: F) -> bool {
        self.elastic[node] || self.busy_until[node].iter().any(|&u| u <= t)
    }

    /// True iff some core of an eligible node of `layer` is idle at `t`. For
    /// the user layer only the OBU of `vehicle` is eligible; without a
    /// vehicle (or with an unknown one) the answer is false.
    pub fn available(&self, layer: Layer, vehicle: Option<usize>, t: F) -> bool {
        match layer {
            Layer::UserLayer => vehicle
                .and_then(|v| self.obu_of_vehicle.get(v))
                .is_some_and(|&node| self.node_idle(node, t)),
            Layer::Rsu => self.rsus.iter().any(|&n| self.node_idle(n, t)),
            Layer::Cloud => self.clouds.iter().any(|&n| self.node_idle(n, t)),
        }
    }

    /// Node of `layer`'s pool with the smallest earliest-free time, ties to
    /// the lowest node id. `None` for the user layer, which is keyed by vehicle.
    pub fn least_busy(&self, layer: Layer) -> Option<usize> {
        let pool = match layer {
            Layer::UserLayer => return None,
            Layer::Rsu => &self.rsus,
            Layer::Cloud => &self.clouds,
        };
        let mut best: Option<(usize, F)> = None;
        for &node in pool {
            let free = if self.elastic[node] {
                F::zero()
            } else {
                self.earliest_free(node).1
            };
            if best.is_none_or(|(_, b)| free < b) {
                best = Some((node, free));
            }
        }
        best.map(|(node, _)| node)
    }

    /// Reserves a core of `node` idle at `start` for `duration` seconds and
    /// books `work` units against the node's layer. Returns the core index.
    pub fn admit(&mut self, node: usize, start: F, duration: F, work: F) -> Result<usize> {
        let (core, until) = self.earliest_free(node);
        let core = if until <= start {
            core
        } else if self.elastic[node] {
            self.busy_until[node].push(F::zero());
            self.busy_until[node].len() - 1
        } else {
            return Err(Error::Admission {
                node_id: node,
                start: start.as_f64(),
            });
        };
        self.busy_until[node][core] = start + duration;
        self.busy_total[node] = self.busy_total[node] + duration;
        let layer = self.layers[node].index();
        self.layer_work[layer] = self.layer_work[layer] + work;
        Ok(core)
    }

    /// Total admitted core-seconds on `node`.
    pub fn busy_total(&self, node: usize) -> F {
        self.busy_total[node]
    }

    /// Total admitted work units on `layer`.
    pub fn layer_work(&self, layer: Layer) -> F {
        self.layer_work[layer.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn platform() -> Platform<f64> {
        build_platform(&PlatformConfig {
            vehicles: 3,
            ..PlatformConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn default_cloud_matches_rented_server() {
        let p = build_platform(&PlatformConfig::<f64>::default()).unwrap();
        assert_eq!(p.cloud_cores(), 16);
        assert_eq!(p.srp(), 0.959);
        assert_eq!(p.k_cloud(), 1.0);
        assert_eq!(p.vehicles(), DEFAULT_VEHICLES);
        assert_eq!(p.rsus().len(), 30);
    }

    #[test]
    fn zero_vehicles_rejected() {
        let err = build_platform(&PlatformConfig::<f64> {
            vehicles: 0,
            ..PlatformConfig::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidPlatform { field: "vehicles", .. }));
    }

    #[test]
    fn non_positive_speed_names_field() {
        let err = build_platform(&PlatformConfig::<f64> {
            rsu_speed: 0.0,
            ..PlatformConfig::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidPlatform { field: "rsu_speed", .. }));
        let err = build_platform(&PlatformConfig::<f64> {
            k_cloud: 1.5,
            ..PlatformConfig::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidPlatform { field: "k_cloud", .. }));
    }

    #[test]
    fn hand_built_platform_invariants() {
        let obu = NodeSpec {
            id: 0,
            layer: Layer::UserLayer,
            speed: 1.0,
            cores: 1,
            link_latency: 0.0,
            vehicle: None,
        };
        let cloud = NodeSpec {
            id: 1,
            layer: Layer::Cloud,
            speed: 1.0,
            cores: 1,
            link_latency: 0.0,
            vehicle: None,
        };
        assert!(Platform::new(vec![obu.clone(), cloud.clone()], 1.0, 1.0, false).is_err());
        let obu = NodeSpec {
            vehicle: Some(0),
            ..obu
        };
        assert!(Platform::new(vec![obu.clone()], 1.0, 1.0, false).is_err());
        assert!(Platform::new(vec![obu, cloud], 1.0, 1.0, false).is_ok());
    }

    #[test]
    fn idle_platform_is_available_everywhere() {
        let p = platform();
        let ledger = CapacityLedger::new(&p);
        assert!(ledger.available(Layer::UserLayer, Some(0), 0.0));
        assert!(ledger.available(Layer::Rsu, None, 0.0));
        assert!(ledger.available(Layer::Cloud, None, 0.0));
        assert!(!ledger.available(Layer::UserLayer, None, 0.0));
    }

    #[test]
    fn busy_owner_obu_is_unavailable() {
        let p = platform();
        let mut ledger = CapacityLedger::new(&p);
        ledger.admit(p.obu_of(1), 0.0, 10.0, 250.0).unwrap();
        assert!(!ledger.available(Layer::UserLayer, Some(1), 5.0));
        assert!(ledger.available(Layer::UserLayer, Some(1), 10.0));
        // other vehicles' OBUs are idle but never count for this owner
        assert!(ledger.available(Layer::UserLayer, Some(0), 5.0));
    }

    #[test]
    fn single_admission_sets_busy_until() {
        let p = platform();
        let mut ledger = CapacityLedger::new(&p);
        let rsu = p.rsus()[0];
        let core = ledger.admit(rsu, 3.0, 2.0, 200.0).unwrap();
        assert_eq!(ledger.busy_until(rsu)[core], 5.0);
        assert_eq!(ledger.layer_work(Layer::Rsu), 200.0);
    }

    #[test]
    fn one_core_conflict_rejected() {
        let p = platform();
        let mut ledger = CapacityLedger::new(&p);
        let obu = p.obu_of(0);
        ledger.admit(obu, 0.0, 1.0, 25.0).unwrap();
        assert!(matches!(
            ledger.admit(obu, 0.0, 1.0, 25.0),
            Err(Error::Admission { .. })
        ));
    }

    #[test]
    fn sixteen_cloud_cores_accept_parallel_work() {
        let p = platform();
        let mut ledger = CapacityLedger::new(&p);
        let cloud = p.clouds()[0];
        for _ in 0..16 {
            ledger.admit(cloud, 0.0, 1.0, 200.0).unwrap();
        }
        assert!(ledger.admit(cloud, 0.0, 1.0, 200.0).is_err());
        assert!(!ledger.available(Layer::Cloud, None, 0.5));
    }

    #[test]
    fn elastic_cloud_never_saturates() {
        let p = build_platform(&PlatformConfig::<f64> {
            vehicles: 1,
            cloud_cores: 1,
            elastic: true,
            ..PlatformConfig::default()
        })
        .unwrap();
        let mut ledger = CapacityLedger::new(&p);
        let cloud = p.clouds()[0];
        for _ in 0..5 {
            ledger.admit(cloud, 0.0, 1.0, 1.0).unwrap();
        }
        assert_eq!(ledger.busy_until(cloud).len(), 5);
        assert!(ledger.available(Layer::Cloud, None, 0.0));
        assert_eq!(ledger.next_slot(cloud, 0.0), (5, 0.0));
    }

    #[test]
    fn least_busy_breaks_ties_by_id() {
        let p = platform();
        let mut ledger = CapacityLedger::new(&p);
        let rsus = p.rsus().to_vec();
        assert_eq!(ledger.least_busy(Layer::Rsu), Some(rsus[0]));
        for _ in 0..4 {
            ledger.admit(rsus[0], 0.0, 1.0, 1.0).unwrap();
        }
        assert_eq!(ledger.least_busy(Layer::Rsu), Some(rsus[1]));
        assert_eq!(ledger.least_busy(Layer::UserLayer), None);
    }

    #[test]
    fn next_slot_queues_fifo() {
        let p = platform();
        let mut ledger = CapacityLedger::new(&p);
        let obu = p.obu_of(2);
        ledger.admit(obu, 0.0, 4.0, 100.0).unwrap();
        assert_eq!(ledger.next_slot(obu, 1.0), (0, 4.0));
        assert_eq!(ledger.next_slot(obu, 6.0), (0, 6.0));
        assert_eq!(ledger.busy_total(obu), 4.0);
    }
}
