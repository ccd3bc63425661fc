//! Domain types for the network, flows, and assignments, plus topology
//! construction utilities.
//!
//! Switches are indexed `0..N`. Links are directed: `link_capacity[i][j] > 0`
//! means the link `i -> j` exists and `link_delay[i][j]` is finite. An absent
//! link has capacity `0` and delay `f64::INFINITY`. Per-switch fault
//! probabilities are stored per time slot; slot indices past the last stored
//! slot reuse the final entry, so a single-slot model works for any horizon.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Capacity used for the internal links created when a multi-server Fog Node
/// is split into one node per server. Large enough that the link can never
/// bind, small enough to serialize as a plain JSON number.
pub const VIRTUAL_LINK_CAPACITY_MBPS: f64 = 1e15;

/// Errors raised while constructing or validating a network model.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("topology document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("switch ids must cover 0..{expected}, got {got:?}")]
    BadSwitchIds { expected: usize, got: Vec<usize> },
    #[error("duplicate link {from} -> {to}")]
    DuplicateLink { from: usize, to: usize },
    #[error("link {from} -> {to} references an unknown switch (N={n})")]
    UnknownLinkEndpoint { from: usize, to: usize, n: usize },
    #[error("self-loop link at switch {0}")]
    SelfLoop(usize),
    #[error("link {from} -> {to}: capacity must be positive and finite, got {capacity}")]
    BadCapacity { from: usize, to: usize, capacity: f64 },
    #[error("link {from} -> {to}: delay must be nonnegative and finite, got {delay}")]
    BadDelay { from: usize, to: usize, delay: f64 },
    #[error("link {from} -> {to} has capacity {capacity} but infinite delay")]
    SentinelMismatch { from: usize, to: usize, capacity: f64 },
    #[error("switch {switch}: fault probability {value} outside [0,1] in slot {slot}")]
    BadFaultProb { switch: usize, slot: usize, value: f64 },
    #[error("switch {switch}: expected {expected} fault-probability slots, got {got}")]
    FaultSlotMismatch { switch: usize, expected: usize, got: usize },
    #[error("fault probability vectors must contain at least one slot")]
    NoFaultSlots,
    #[error("max utilization must be in (0,1], got {0}")]
    BadUtilization(f64),
    #[error("max fault threshold must be in [0,1], got {0}")]
    BadFaultThreshold(f64),
    #[error("unknown switch index {0} (N={1})")]
    UnknownSwitch(usize, usize),
    #[error("fog node on switch {switch}: {reason}")]
    BadFogNode { switch: usize, reason: String },
    #[error("multi-server expansion needs at least one server spec")]
    EmptyServerList,
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
}

/// A compute resource attached to an edge switch, hosting VNFs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FogNode {
    /// Index of the switch this node is attached to.
    pub host_switch: usize,
    /// Processing capacity in processing units.
    pub capacity: f64,
    /// `supported_vnfs[x]` is true when VNF type `x` can run here.
    pub supported_vnfs: Vec<bool>,
    /// Power draw when the node is ON, in watts.
    pub power_on_watts: f64,
    /// Idle draw is `(1 - idle_fraction) * power_on_watts`.
    pub idle_fraction: f64,
}

impl FogNode {
    pub fn supports(&self, vnf: usize) -> bool {
        self.supported_vnfs.get(vnf).copied().unwrap_or(false)
    }
}

/// Catalog of VNF types: per-type processing demand and processing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnfCatalog {
    /// Number of VNF types.
    pub vnf_count: usize,
    /// Processing units consumed per unit of flow rate, one entry per type.
    pub proc_per_unit: Vec<f64>,
    /// Processing time in ms per unit of data, one entry per type.
    pub proc_time_ms: Vec<f64>,
}

impl VnfCatalog {
    /// A catalog with `vnf_count` types that all share the same demand and
    /// processing time.
    pub fn uniform(vnf_count: usize, proc_per_unit: f64, proc_time_ms: f64) -> Self {
        Self {
            vnf_count,
            proc_per_unit: vec![proc_per_unit; vnf_count],
            proc_time_ms: vec![proc_time_ms; vnf_count],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.proc_per_unit.len() != self.vnf_count || self.proc_time_ms.len() != self.vnf_count
        {
            return Err(ModelError::Shape(format!(
                "catalog vectors must have length {}",
                self.vnf_count
            )));
        }
        if self.proc_per_unit.iter().any(|v| *v < 0.0 || !v.is_finite())
            || self.proc_time_ms.iter().any(|v| *v < 0.0 || !v.is_finite())
        {
            return Err(ModelError::Shape(
                "catalog entries must be nonnegative and finite".into(),
            ));
        }
        Ok(())
    }
}

/// The network under control: switches, directed links, per-slot switch fault
/// probabilities, attached Fog Nodes, and the global utilization/fault caps.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub switch_count: usize,
    /// Link capacity in Mb/s; 0 means no link.
    pub link_capacity: Vec<Vec<f64>>,
    /// Link propagation delay in ms; `f64::INFINITY` means no link.
    pub link_delay: Vec<Vec<f64>>,
    /// `fault_prob[t][i]` is the fault probability of switch `i` in slot `t`.
    pub fault_prob: Vec<Vec<f64>>,
    /// At most one Fog Node per switch, indexed by hosting switch.
    pub fog_nodes: Vec<Option<FogNode>>,
    /// Maximum permitted link utilization fraction.
    pub max_utilization: f64,
    /// Maximum tolerable end-to-end fault probability per flow path.
    pub max_fault: f64,
}

impl NetworkModel {
    /// An edgeless model with `n` switches, fault probability 0 everywhere,
    /// no Fog Nodes, `max_utilization = 1`, `max_fault = 1`.
    pub fn empty(n: usize) -> Self {
        Self {
            switch_count: n,
            link_capacity: vec![vec![0.0; n]; n],
            link_delay: vec![vec![f64::INFINITY; n]; n],
            fault_prob: vec![vec![0.0; n]],
            fog_nodes: vec![None; n],
            max_utilization: 1.0,
            max_fault: 1.0,
        }
    }

    /// Installs a bidirectional link with the given capacity and delay.
    pub fn add_undirected_link(&mut self, a: usize, b: usize, capacity_mbps: f64, delay_ms: f64) {
        self.link_capacity[a][b] = capacity_mbps;
        self.link_capacity[b][a] = capacity_mbps;
        self.link_delay[a][b] = delay_ms;
        self.link_delay[b][a] = delay_ms;
    }

    pub fn has_link(&self, from: usize, to: usize) -> bool {
        self.link_capacity[from][to] > 0.0
    }

    /// Fault probability of `switch` in `slot`; slots past the stored horizon
    /// reuse the last stored slot.
    pub fn fault_prob(&self, slot: usize, switch: usize) -> f64 {
        let t = slot.min(self.fault_prob.len() - 1);
        self.fault_prob[t][switch]
    }

    pub fn fog(&self, switch: usize) -> Option<&FogNode> {
        self.fog_nodes[switch].as_ref()
    }

    /// Processing capacity of the Fog Node at `switch`, 0 when there is none.
    pub fn fog_capacity(&self, switch: usize) -> f64 {
        self.fog(switch).map(|f| f.capacity).unwrap_or(0.0)
    }

    pub fn fog_supports(&self, switch: usize, vnf: usize) -> bool {
        self.fog(switch).map(|f| f.supports(vnf)).unwrap_or(false)
    }

    /// Neighbors reachable over an existing link out of `from`, ascending.
    pub fn neighbors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.switch_count).filter(move |&j| self.has_link(from, j))
    }

    /// Number of directed links present.
    pub fn directed_link_count(&self) -> usize {
        let n = self.switch_count;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.has_link(i, j))
            .count()
    }

    /// Mean capacity over existing directed links. Used as the reference
    /// "link capacity" when flow rates are drawn as a fraction of it.
    pub fn reference_capacity(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..self.switch_count {
            for j in 0..self.switch_count {
                if self.has_link(i, j) {
                    sum += self.link_capacity[i][j];
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    /// Mean delay over existing directed links.
    pub fn reference_delay(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..self.switch_count {
            for j in 0..self.switch_count {
                if self.has_link(i, j) {
                    sum += self.link_delay[i][j];
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    /// The residual model after the given switches fail: their links vanish
    /// and their Fog Nodes are removed. Switch indices are preserved.
    pub fn remove_switches(&self, failed: &std::collections::BTreeSet<usize>) -> NetworkModel {
        let mut out = self.clone();
        for &s in failed {
            if s >= self.switch_count {
                continue;
            }
            for j in 0..self.switch_count {
                out.link_capacity[s][j] = 0.0;
                out.link_capacity[j][s] = 0.0;
                out.link_delay[s][j] = f64::INFINITY;
                out.link_delay[j][s] = f64::INFINITY;
            }
            out.fog_nodes[s] = None;
        }
        out
    }

    /// Checks every structural invariant of the type.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.switch_count;
        if self.link_capacity.len() != n
            || self.link_delay.len() != n
            || self.link_capacity.iter().any(|r| r.len() != n)
            || self.link_delay.iter().any(|r| r.len() != n)
        {
            return Err(ModelError::Shape(format!("matrices must be {n}x{n}")));
        }
        if self.fog_nodes.len() != n {
            return Err(ModelError::Shape(format!("fog vector must have length {n}")));
        }
        for i in 0..n {
            for j in 0..n {
                let b = self.link_capacity[i][j];
                let d = self.link_delay[i][j];
                if b < 0.0 || b.is_nan() {
                    return Err(ModelError::BadCapacity { from: i, to: j, capacity: b });
                }
                if d < 0.0 || d.is_nan() {
                    return Err(ModelError::BadDelay { from: i, to: j, delay: d });
                }
                if (b > 0.0) != d.is_finite() {
                    return Err(ModelError::SentinelMismatch { from: i, to: j, capacity: b });
                }
                if i == j && b > 0.0 {
                    return Err(ModelError::SelfLoop(i));
                }
            }
        }
        if self.fault_prob.is_empty() {
            return Err(ModelError::NoFaultSlots);
        }
        for (t, slot) in self.fault_prob.iter().enumerate() {
            if slot.len() != n {
                return Err(ModelError::Shape(format!(
                    "fault slot {t} has length {} (expected {n})",
                    slot.len()
                )));
            }
            for (i, p) in slot.iter().enumerate() {
                if !(0.0..=1.0).contains(p) {
                    return Err(ModelError::BadFaultProb { switch: i, slot: t, value: *p });
                }
            }
        }
        for (i, fog) in self.fog_nodes.iter().enumerate() {
            if let Some(f) = fog {
                if f.host_switch != i {
                    return Err(ModelError::BadFogNode {
                        switch: i,
                        reason: format!("host_switch is {}", f.host_switch),
                    });
                }
                if f.capacity < 0.0 || !f.capacity.is_finite() {
                    return Err(ModelError::BadFogNode {
                        switch: i,
                        reason: format!("capacity {}", f.capacity),
                    });
                }
                if f.power_on_watts < 0.0 || !f.power_on_watts.is_finite() {
                    return Err(ModelError::BadFogNode {
                        switch: i,
                        reason: format!("power {}", f.power_on_watts),
                    });
                }
                if !(0.0..=1.0).contains(&f.idle_fraction) {
                    return Err(ModelError::BadFogNode {
                        switch: i,
                        reason: format!("idle fraction {}", f.idle_fraction),
                    });
                }
            }
        }
        if !(self.max_utilization > 0.0 && self.max_utilization <= 1.0) {
            return Err(ModelError::BadUtilization(self.max_utilization));
        }
        if !(0.0..=1.0).contains(&self.max_fault) {
            return Err(ModelError::BadFaultThreshold(self.max_fault));
        }
        Ok(())
    }
}

/// One traffic demand: endpoints, per-slot rate, per-slot requested VNF set,
/// and the end-to-end delay budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub id: usize,
    pub source: usize,
    pub dest: usize,
    /// Rate in Mb/s, one entry per slot (last entry reused past the horizon).
    pub rate: Vec<f64>,
    /// Requested VNF set per slot, each entry of length X.
    pub requested: Vec<Vec<bool>>,
    /// Maximum tolerable processing plus propagation delay, in ms.
    pub max_delay_ms: f64,
}

impl FlowSpec {
    pub fn rate(&self, slot: usize) -> f64 {
        self.rate[slot.min(self.rate.len() - 1)]
    }

    pub fn requested(&self, slot: usize) -> &[bool] {
        &self.requested[slot.min(self.requested.len() - 1)]
    }

    /// Indices of the VNFs requested in `slot`, ascending.
    pub fn requested_vnfs(&self, slot: usize) -> Vec<usize> {
        self.requested(slot)
            .iter()
            .enumerate()
            .filter_map(|(x, r)| r.then_some(x))
            .collect()
    }

    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        if self.source >= n || self.dest >= n {
            return Err(ModelError::UnknownSwitch(self.source.max(self.dest), n));
        }
        if self.source == self.dest {
            return Err(ModelError::Shape(format!("flow {}: source equals destination", self.id)));
        }
        if self.rate.is_empty() || self.requested.is_empty() {
            return Err(ModelError::Shape(format!("flow {}: needs at least one slot", self.id)));
        }
        if self.rate.iter().any(|r| *r < 0.0 || !r.is_finite()) {
            return Err(ModelError::Shape(format!("flow {}: negative rate", self.id)));
        }
        Ok(())
    }
}

/// Per-flow resource usage for a single slot: which links the flow occupies
/// and where its VNFs run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowAssignment {
    /// Directed links `(i, j)` the flow is routed over.
    pub links: BTreeSet<(usize, usize)>,
    /// `(switch, vnf)` pairs describing where each VNF is served.
    pub vnf_placements: BTreeSet<(usize, usize)>,
}

impl FlowAssignment {
    /// Builds the link set of a node path like `[s, a, b, d]`.
    pub fn from_path(path: &[usize]) -> Self {
        let links = path.windows(2).map(|w| (w[0], w[1])).collect();
        Self { links, vnf_placements: BTreeSet::new() }
    }

    pub fn uses_switch(&self, switch: usize) -> bool {
        self.links.iter().any(|&(i, j)| i == switch || j == switch)
            || self.vnf_placements.iter().any(|&(i, _)| i == switch)
    }
}

/// The decision for one slot: per-flow usage plus the Fog Node power states.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Keyed by flow id. Flows the solver dropped are absent.
    pub flows: std::collections::BTreeMap<usize, FlowAssignment>,
    /// `fog_on[i]` is true when the Fog Node at switch `i` is ON.
    pub fog_on: Vec<bool>,
}

impl Assignment {
    pub fn empty(n: usize) -> Self {
        Self { flows: Default::default(), fog_on: vec![false; n] }
    }

    /// Switches hosting at least one VNF placement.
    pub fn used_fog_switches(&self) -> BTreeSet<usize> {
        self.flows
            .values()
            .flat_map(|fa| fa.vnf_placements.iter().map(|&(i, _)| i))
            .collect()
    }

    /// Sets `fog_on` to exactly the set of switches that serve a VNF.
    pub fn set_fog_on_from_usage(&mut self, n: usize) {
        let used = self.used_fog_switches();
        self.fog_on = (0..n).map(|i| used.contains(&i)).collect();
    }
}

/// Splits the (multi-server) Fog Node at `switch` into one Fog Node per
/// server: the original switch keeps the first server and each remaining
/// server moves to a fresh switch wired to the original with a zero-delay,
/// effectively unconstrained link. Added switches get fault probability 0 in
/// every slot, so end-to-end path fault is unchanged by the substitution.
pub fn expand_multi_server_fog(
    model: &NetworkModel,
    switch: usize,
    server_specs: &[FogNode],
) -> Result<NetworkModel, ModelError> {
    if switch >= model.switch_count {
        return Err(ModelError::UnknownSwitch(switch, model.switch_count));
    }
    if server_specs.is_empty() {
        return Err(ModelError::EmptyServerList);
    }
    let n = model.switch_count;
    let added = server_specs.len() - 1;
    let n_new = n + added;

    let mut out = model.clone();
    out.switch_count = n_new;
    for row in &mut out.link_capacity {
        row.resize(n_new, 0.0);
    }
    for row in &mut out.link_delay {
        row.resize(n_new, f64::INFINITY);
    }
    out.link_capacity.resize_with(n_new, || vec![0.0; n_new]);
    out.link_delay.resize_with(n_new, || vec![f64::INFINITY; n_new]);
    for slot in &mut out.fault_prob {
        slot.resize(n_new, 0.0);
    }
    out.fog_nodes.resize(n_new, None);

    let mut first = server_specs[0].clone();
    first.host_switch = switch;
    out.fog_nodes[switch] = Some(first);
    for (k, spec) in server_specs.iter().enumerate().skip(1) {
        let host = n + k - 1;
        let mut fog = spec.clone();
        fog.host_switch = host;
        out.fog_nodes[host] = Some(fog);
        out.add_undirected_link(switch, host, VIRTUAL_LINK_CAPACITY_MBPS, 0.0);
    }
    Ok(out)
}

/// The built-in Abilene research backbone: 11 switches, 14 bidirectional
/// links, 1 Gb/s capacity and 100 ms propagation delay on every link, switch
/// fault probability 0.01, and a maximum tolerable path fault of 0.1.
pub fn abilene() -> NetworkModel {
    // 0 Seattle, 1 Sunnyvale, 2 Los Angeles, 3 Denver, 4 Kansas City,
    // 5 Houston, 6 Atlanta, 7 Washington DC, 8 New York, 9 Chicago,
    // 10 Indianapolis.
    const LINKS: [(usize, usize); 14] = [
        (0, 1),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 5),
        (3, 4),
        (4, 5),
        (4, 10),
        (5, 6),
        (6, 7),
        (6, 10),
        (7, 8),
        (8, 9),
        (9, 10),
    ];
    let mut model = NetworkModel::empty(11);
    for (a, b) in LINKS {
        model.add_undirected_link(a, b, 1000.0, 100.0);
    }
    model.fault_prob = vec![vec![0.01; 11]];
    model.max_utilization = 1.0;
    model.max_fault = 0.1;
    model
}

// --- topology document (external JSON format) ---

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FogDoc {
    pub capacity: f64,
    pub vnfs: Vec<bool>,
    pub power_w: f64,
    pub idle_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDoc {
    pub id: usize,
    pub fault_prob: Vec<f64>,
    pub fog: Option<FogDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDoc {
    pub from: usize,
    pub to: usize,
    pub capacity_mbps: f64,
    pub delay_ms: f64,
}

/// Serialized topology. Links are directed when `directed` is true; otherwise
/// every entry stands for a pair of directed links. Absent links are simply
/// absent entries (capacity-0 / infinite-delay sentinels are never written).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub switches: Vec<SwitchDoc>,
    pub links: Vec<LinkDoc>,
    pub mu: f64,
    pub mt: f64,
    #[serde(default)]
    pub directed: bool,
    /// Optional VNF catalog carried alongside the topology.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<VnfCatalog>,
}

impl TopologyDoc {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds and validates the in-memory model.
    pub fn build(&self) -> Result<NetworkModel, ModelError> {
        let n = self.switches.len();
        let mut ids: Vec<usize> = self.switches.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        if ids != (0..n).collect::<Vec<_>>() {
            return Err(ModelError::BadSwitchIds { expected: n, got: ids });
        }
        let slots = self
            .switches
            .first()
            .map(|s| s.fault_prob.len())
            .ok_or(ModelError::BadSwitchIds { expected: 1, got: vec![] })?;
        if slots == 0 {
            return Err(ModelError::NoFaultSlots);
        }
        let mut model = NetworkModel::empty(n);
        model.fault_prob = vec![vec![0.0; n]; slots];
        model.max_utilization = self.mu;
        model.max_fault = self.mt;
        for sw in &self.switches {
            if sw.fault_prob.len() != slots {
                return Err(ModelError::FaultSlotMismatch {
                    switch: sw.id,
                    expected: slots,
                    got: sw.fault_prob.len(),
                });
            }
            for (t, p) in sw.fault_prob.iter().enumerate() {
                model.fault_prob[t][sw.id] = *p;
            }
            if let Some(fog) = &sw.fog {
                model.fog_nodes[sw.id] = Some(FogNode {
                    host_switch: sw.id,
                    capacity: fog.capacity,
                    supported_vnfs: fog.vnfs.clone(),
                    power_on_watts: fog.power_w,
                    idle_fraction: fog.idle_fraction,
                });
            }
        }
        let mut seen = BTreeSet::new();
        for link in &self.links {
            if link.from >= n || link.to >= n {
                return Err(ModelError::UnknownLinkEndpoint { from: link.from, to: link.to, n });
            }
            if link.from == link.to {
                return Err(ModelError::SelfLoop(link.from));
            }
            if !(link.capacity_mbps > 0.0 && link.capacity_mbps.is_finite()) {
                return Err(ModelError::BadCapacity {
                    from: link.from,
                    to: link.to,
                    capacity: link.capacity_mbps,
                });
            }
            if !(link.delay_ms >= 0.0 && link.delay_ms.is_finite()) {
                return Err(ModelError::BadDelay {
                    from: link.from,
                    to: link.to,
                    delay: link.delay_ms,
                });
            }
            let pairs: Vec<(usize, usize)> = if self.directed {
                vec![(link.from, link.to)]
            } else {
                vec![(link.from, link.to), (link.to, link.from)]
            };
            for (a, b) in pairs {
                if !seen.insert((a, b)) {
                    return Err(ModelError::DuplicateLink { from: a, to: b });
                }
                model.link_capacity[a][b] = link.capacity_mbps;
                model.link_delay[a][b] = link.delay_ms;
            }
        }
        model.validate()?;
        Ok(model)
    }

    /// The lossless document form of `model` (directed entries).
    pub fn from_model(model: &NetworkModel, catalog: Option<&VnfCatalog>) -> Self {
        let n = model.switch_count;
        let switches = (0..n)
            .map(|i| SwitchDoc {
                id: i,
                fault_prob: model.fault_prob.iter().map(|slot| slot[i]).collect(),
                fog: model.fog_nodes[i].as_ref().map(|f| FogDoc {
                    capacity: f.capacity,
                    vnfs: f.supported_vnfs.clone(),
                    power_w: f.power_on_watts,
                    idle_fraction: f.idle_fraction,
                }),
            })
            .collect();
        let mut links = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if model.has_link(i, j) {
                    links.push(LinkDoc {
                        from: i,
                        to: j,
                        capacity_mbps: model.link_capacity[i][j],
                        delay_ms: model.link_delay[i][j],
                    });
                }
            }
        }
        Self {
            switches,
            links,
            mu: model.max_utilization,
            mt: model.max_fault,
            directed: true,
            catalog: catalog.cloned(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology doc serializes")
    }
}

/// Parses a topology document and builds the model.
pub fn load_topology(text: &str) -> Result<NetworkModel, ModelError> {
    TopologyDoc::parse(text)?.build()
}

/// Serializes a model to the topology document JSON.
pub fn serialize_topology(model: &NetworkModel, catalog: Option<&VnfCatalog>) -> String {
    TopologyDoc::from_model(model, catalog).to_json()
}
