//! Constraint checks, objective, and evaluation metrics.
//!
//! Everything here is pure: both solvers are validated against these
//! functions, and the exhaustive test oracles score candidate assignments
//! with them. A slot lasts one second by convention, so Fog Node watts and
//! per-slot joules coincide numerically.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, FlowAssignment, FlowSpec, NetworkModel, VnfCatalog};

/// Largest switch count for which a dense `2^N` fault table may be built.
pub const FAULT_TABLE_HARD_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum FeasibilityError {
    #[error("objective weights must satisfy alpha + beta = 1 with both in [0,1]")]
    BadWeights,
    #[error("fault table needs N <= {cap}, model has {n} switches")]
    FaultTableTooLarge { n: usize, cap: usize },
}

/// Why a flow's link set does not describe a simple source-to-destination path.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum PathError {
    #[error("flow has no links assigned")]
    Empty,
    #[error("switch {0} has more than one outgoing used link")]
    Branching(usize),
    #[error("walk stops at switch {0} before reaching the destination")]
    DeadEnd(usize),
    #[error("walk revisits switch {0}")]
    Revisit(usize),
    #[error("{0} used links are not on the source-destination walk")]
    DetachedLinks(usize),
    #[error("link ({0}, {1}) does not exist in the model")]
    MissingLink(usize, usize),
}

/// A flow's route recovered from its link set: the ordered switch sequence,
/// the switch-set path ID, and the end-to-end fault probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathView {
    pub sequence: Vec<usize>,
    pub path_id: u64,
    pub fault_prob: f64,
}

impl PathView {
    /// Walks the link set from the flow's source and validates that it forms
    /// a simple path ending at the destination with no stray links.
    pub fn from_assignment(
        model: &NetworkModel,
        flow: &FlowSpec,
        fa: &FlowAssignment,
        slot: usize,
    ) -> Result<Self, PathError> {
        if fa.links.is_empty() {
            return Err(PathError::Empty);
        }
        for &(i, j) in &fa.links {
            if !model.has_link(i, j) {
                return Err(PathError::MissingLink(i, j));
            }
        }
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for &(i, j) in &fa.links {
            if next.insert(i, j).is_some() {
                return Err(PathError::Branching(i));
            }
        }
        let mut sequence = vec![flow.source];
        let mut seen: BTreeSet<usize> = BTreeSet::from([flow.source]);
        let mut cur = flow.source;
        while cur != flow.dest {
            let Some(&step) = next.get(&cur) else {
                return Err(PathError::DeadEnd(cur));
            };
            if !seen.insert(step) {
                return Err(PathError::Revisit(step));
            }
            sequence.push(step);
            cur = step;
        }
        if sequence.len() - 1 != fa.links.len() {
            return Err(PathError::DetachedLinks(fa.links.len() - (sequence.len() - 1)));
        }
        let path_id = path_id(flow, fa)?;
        let fault_prob = path_fault_probability(model, flow, fa, slot)?;
        Ok(Self { sequence, path_id, fault_prob })
    }
}

// --- individual constraint checks ---

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCapacityViolation {
    pub link: (usize, usize),
    pub load: f64,
    pub limit: f64,
}

/// Total per-link load against `mu * B` (link capacity rule).
pub fn check_link_capacity(
    model: &NetworkModel,
    flows: &[FlowSpec],
    assignment: &Assignment,
    slot: usize,
) -> Vec<LinkCapacityViolation> {
    let loads = link_loads(model, flows, assignment, slot);
    let mut out = Vec::new();
    for ((i, j), load) in loads {
        let limit = model.max_utilization * model.link_capacity[i][j];
        if load > limit {
            out.push(LinkCapacityViolation { link: (i, j), load, limit });
        }
    }
    out
}

/// Aggregated rate per used link.
pub fn link_loads(
    model: &NetworkModel,
    flows: &[FlowSpec],
    assignment: &Assignment,
    slot: usize,
) -> BTreeMap<(usize, usize), f64> {
    let by_id: BTreeMap<usize, &FlowSpec> = flows.iter().map(|f| (f.id, f)).collect();
    let mut loads: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let _ = model;
    for (id, fa) in &assignment.flows {
        let Some(flow) = by_id.get(id) else { continue };
        for &link in &fa.links {
            *loads.entry(link).or_insert(0.0) += flow.rate(slot);
        }
    }
    loads
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationViolation {
    pub flow: usize,
    pub switch: usize,
    pub out_minus_in: i64,
    pub expected: i64,
}

/// Flow conservation: net outflow is +1 at the source, -1 at the destination,
/// 0 elsewhere.
pub fn check_flow_conservation(
    model: &NetworkModel,
    flows: &[FlowSpec],
    assignment: &Assignment,
) -> Vec<ConservationViolation> {
    let by_id: BTreeMap<usize, &FlowSpec> = flows.iter().map(|f| (f.id, f)).collect();
    let mut out = Vec::new();
    for (id, fa) in &assignment.flows {
        let Some(flow) = by_id.get(id) else { continue };
        let mut net = vec![0i64; model.switch_count];
        for &(i, j) in &fa.links {
            net[i] += 1;
            net[j] -= 1;
        }
        for (switch, &value) in net.iter().enumerate() {
            let expected = if switch == flow.source {
                1
            } else if switch == flow.dest {
                -1
            } else {
                0
            };
            if value != expected {
                out.push(ConservationViolation { flow: *id, switch, out_minus_in: value, expected });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopViolation {
    pub flow: usize,
    pub error: PathError,
}

/// Loop freedom: at most one outgoing used link per switch and every used
/// link lies on the single source-destination walk (detached cycles are
/// rejected even when conservation balances).
pub fn check_loop_free(
    model: &NetworkModel,
    flows: &[FlowSpec],
    assignment: &Assignment,
    slot: usize,
) -> Vec<LoopViolation> {
    let by_id: BTreeMap<usize, &FlowSpec> = flows.iter().map(|f| (f.id, f)).collect();
    let mut out = Vec::new();
    for (id, fa) in &assignment.flows {
        let Some(flow) = by_id.get(id) else { continue };
        if let Err(error) = PathView::from_assignment(model, flow, fa, slot) {
            out.push(LoopViolation { flow: *id, error });
        }
    }
    out
}

/// Propagation-delay budget left after the per-VNF processing time is paid:
/// `T^f - sum_x(TP_x * R_x * C)`. May be negative, in which case no path can
/// meet the deadline.
pub fn propagation_budget(flow: &FlowSpec, catalog: &VnfCatalog, slot: usize) -> f64 {
    let rate = flow.rate(slot);
    let processing: f64 = flow
        .requested_vnfs(slot)
        .iter()
        .map(|&x| catalog.proc_time_ms[x] * rate)
        .sum();
    flow.max_delay_ms - processing
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayViolation {
    pub flow: usize,
    pub path_delay_ms: f64,
    pub budget_ms: f64,
}

/// Sum of used-link propagation delays against the per-flow budget.
pub fn check_delay(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    assignment: &Assignment,
    slot: usize,
) -> Vec<DelayViolation> {
    let by_id: BTreeMap<usize, &FlowSpec> = flows.iter().map(|f| (f.id, f)).collect();
    let mut out = Vec::new();
    for (id, fa) in &assignment.flows {
        let Some(flow) = by_id.get(id) else { continue };
        let path_delay_ms: f64 = fa.links.iter().map(|&(i, j)| model.link_delay[i][j]).sum();
        let budget_ms = propagation_budget(flow, catalog, slot);
        if path_delay_ms > budget_ms {
            out.push(DelayViolation { flow: *id, path_delay_ms, budget_ms });
        }
    }
    out
}

/// End-to-end fault probability of the flow's path:
/// `1 - prod_{i with an outgoing used link}(1 - p_i) * (1 - p_dest)`.
pub fn path_fault_probability(
    model: &NetworkModel,
    flow: &FlowSpec,
    fa: &FlowAssignment,
    slot: usize,
) -> Result<f64, PathError> {
    if fa.links.is_empty() {
        return Err(PathError::Empty);
    }
    let mut survival = 1.0 - model.fault_prob(slot, flow.dest);
    for &(i, _) in &fa.links {
        survival *= 1.0 - model.fault_prob(slot, i);
    }
    Ok(1.0 - survival)
}

/// Switch-set path ID: `2^i` for every switch with an outgoing used link plus
/// `2^dest`. Two routes over the same switch set share an ID.
pub fn path_id(flow: &FlowSpec, fa: &FlowAssignment) -> Result<u64, PathError> {
    if fa.links.is_empty() {
        return Err(PathError::Empty);
    }
    let mut id: u64 = 1u64 << flow.dest;
    for &(i, _) in &fa.links {
        id |= 1u64 << i;
    }
    Ok(id)
}

/// Dense fault table indexed by path ID: entry `r` is
/// `1 - prod_{i in bits(r)}(1 - p_i)`. Only usable at exact-solver scale.
pub fn fault_table(
    model: &NetworkModel,
    slot: usize,
    max_n: usize,
) -> Result<Vec<f64>, FeasibilityError> {
    let n = model.switch_count;
    let cap = max_n.min(FAULT_TABLE_HARD_CAP);
    if n > cap {
        return Err(FeasibilityError::FaultTableTooLarge { n, cap });
    }
    let mut table = vec![0.0; 1usize << n];
    for r in 0..table.len() {
        let mut survival = 1.0;
        for i in 0..n {
            if r & (1 << i) != 0 {
                survival *= 1.0 - model.fault_prob(slot, i);
            }
        }
        table[r] = 1.0 - survival;
    }
    Ok(table)
}

// --- service function chaining checks ---

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SfcViolations {
    /// Requested VNFs that no node serves.
    pub unserved: Vec<(usize, usize)>,
    /// Placements on switches the flow never enters (source excepted).
    pub off_path: Vec<(usize, usize, usize)>,
    /// Placements on nodes that do not support the VNF.
    pub unsupported: Vec<(usize, usize, usize)>,
    /// VNFs served a number of times different from the request (per flow).
    pub multiplicity: Vec<(usize, usize, usize)>,
    /// Fog Nodes whose processing load exceeds capacity.
    pub node_capacity: Vec<(usize, f64, f64)>,
}

impl SfcViolations {
    pub fn is_empty(&self) -> bool {
        self.unserved.is_empty()
            && self.off_path.is_empty()
            && self.unsupported.is_empty()
            && self.multiplicity.is_empty()
            && self.node_capacity.is_empty()
    }
}

/// All five chaining checks, reported separately: coverage of the requested
/// set, service only on crossed nodes (source exempt), support on the hosting
/// node, exactly-once delivery per requested VNF, and Fog Node capacity.
pub fn check_sfc(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    assignment: &Assignment,
    slot: usize,
) -> SfcViolations {
    let by_id: BTreeMap<usize, &FlowSpec> = flows.iter().map(|f| (f.id, f)).collect();
    let mut v = SfcViolations::default();
    let mut fog_load: BTreeMap<usize, f64> = BTreeMap::new();

    for (id, fa) in &assignment.flows {
        let Some(flow) = by_id.get(id) else { continue };
        let entered: BTreeSet<usize> = fa.links.iter().map(|&(_, j)| j).collect();
        let mut served_count = vec![0usize; catalog.vnf_count];
        for &(node, x) in &fa.vnf_placements {
            if x < catalog.vnf_count {
                served_count[x] += 1;
            }
            if node != flow.source && !entered.contains(&node) {
                v.off_path.push((*id, node, x));
            }
            if !model.fog_supports(node, x) {
                v.unsupported.push((*id, node, x));
            }
            *fog_load.entry(node).or_insert(0.0) +=
                catalog.proc_per_unit.get(x).copied().unwrap_or(0.0) * flow.rate(slot);
        }
        for (x, &req) in flow.requested(slot).iter().enumerate() {
            let expected = usize::from(req);
            if req && served_count[x] == 0 {
                v.unserved.push((*id, x));
            }
            if served_count[x] != expected {
                v.multiplicity.push((*id, x, served_count[x]));
            }
        }
    }
    for (node, load) in fog_load {
        let cap = model.fog_capacity(node);
        if load > cap {
            v.node_capacity.push((node, load, cap));
        }
    }
    v
}

// --- energy / side-effect / objective ---

/// Energy in joules consumed by ON Fog Nodes during the slot (slot = 1 s).
pub fn energy(model: &NetworkModel, assignment: &Assignment) -> f64 {
    assignment
        .fog_on
        .iter()
        .enumerate()
        .filter(|&(_, on)| *on)
        .map(|(i, _)| model.fog(i).map(|f| f.power_on_watts).unwrap_or(0.0))
        .sum()
}

/// Informational idle-mode energy of the Fog Nodes that exist but are OFF:
/// `(1 - idle_fraction) * power`. Not part of the optimized objective.
pub fn idle_energy(model: &NetworkModel, assignment: &Assignment) -> f64 {
    model
        .fog_nodes
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.as_ref().map(|f| (i, f)))
        .filter(|&(i, _)| !assignment.fog_on.get(i).copied().unwrap_or(false))
        .map(|(_, f)| (1.0 - f.idle_fraction) * f.power_on_watts)
        .sum()
}

/// Number of forwarding-table entries that differ between two assignments
/// (an L1 distance over the per-flow link tensors).
pub fn side_effect(prev: &Assignment, next: &Assignment) -> u64 {
    let ids: BTreeSet<usize> =
        prev.flows.keys().chain(next.flows.keys()).copied().collect();
    let empty = BTreeSet::new();
    let mut total = 0u64;
    for id in ids {
        let a = prev.flows.get(&id).map(|fa| &fa.links).unwrap_or(&empty);
        let b = next.flows.get(&id).map(|fa| &fa.links).unwrap_or(&empty);
        total += a.symmetric_difference(b).count() as u64;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FogOnViolation {
    pub switch: usize,
    pub placements: usize,
}

/// Fog power-state consistency: a node serving at least one VNF must be ON.
/// The reverse direction is legal, so ON nodes serving nothing are returned
/// as warnings rather than violations.
pub fn check_fog_on(model: &NetworkModel, assignment: &Assignment) -> (Vec<FogOnViolation>, Vec<usize>) {
    let mut used = vec![0usize; model.switch_count];
    for fa in assignment.flows.values() {
        for &(node, _) in &fa.vnf_placements {
            used[node] += 1;
        }
    }
    let mut violations = Vec::new();
    let mut wasteful = Vec::new();
    for i in 0..model.switch_count {
        let on = assignment.fog_on.get(i).copied().unwrap_or(false);
        if used[i] > 0 && !on {
            violations.push(FogOnViolation { switch: i, placements: used[i] });
        }
        if used[i] == 0 && on {
            wasteful.push(i);
        }
    }
    (violations, wasteful)
}

/// The reconfiguration objective `alpha * E + beta * NS`.
pub fn objective(
    model: &NetworkModel,
    prev: &Assignment,
    next: &Assignment,
    alpha: f64,
    beta: f64,
) -> Result<f64, FeasibilityError> {
    check_weights(alpha, beta)?;
    Ok(alpha * energy(model, next) + beta * side_effect(prev, next) as f64)
}

pub fn check_weights(alpha: f64, beta: f64) -> Result<(), FeasibilityError> {
    let ok = (0.0..=1.0).contains(&alpha)
        && (0.0..=1.0).contains(&beta)
        && (alpha + beta - 1.0).abs() <= 1e-9;
    if ok {
        Ok(())
    } else {
        Err(FeasibilityError::BadWeights)
    }
}

// --- metrics ---

/// Per-slot evaluation metrics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub energy_j: f64,
    pub idle_energy_j: f64,
    pub side_effect: u64,
    pub mean_fault: f64,
    pub max_fault: f64,
    pub mean_path_len: f64,
    pub mean_link_util: f64,
    pub max_link_util: f64,
    pub mean_fog_util: f64,
    pub max_fog_util: f64,
    pub flows_placed: usize,
    pub flows_total: usize,
}

/// Utilization and quality metrics for one slot's assignment. Link
/// utilization averages over used links only; Fog utilization averages over
/// ON nodes only (idle nodes are excluded).
pub fn metrics(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    prev: &Assignment,
    next: &Assignment,
    slot: usize,
) -> MetricsReport {
    let by_id: BTreeMap<usize, &FlowSpec> = flows.iter().map(|f| (f.id, f)).collect();
    let mut report = MetricsReport {
        energy_j: energy(model, next),
        idle_energy_j: idle_energy(model, next),
        side_effect: side_effect(prev, next),
        flows_total: flows.len(),
        ..Default::default()
    };

    let mut faults = Vec::new();
    let mut lengths = Vec::new();
    for (id, fa) in &next.flows {
        let Some(flow) = by_id.get(id) else { continue };
        if let Ok(view) = PathView::from_assignment(model, flow, fa, slot) {
            faults.push(view.fault_prob);
            lengths.push(fa.links.len() as f64);
        }
        report.flows_placed += 1;
    }
    if !faults.is_empty() {
        report.mean_fault = faults.iter().sum::<f64>() / faults.len() as f64;
        report.max_fault = faults.iter().cloned().fold(0.0, f64::max);
        report.mean_path_len = lengths.iter().sum::<f64>() / lengths.len() as f64;
    }

    let loads = link_loads(model, flows, next, slot);
    let utils: Vec<f64> =
        loads.iter().map(|(&(i, j), &load)| load / model.link_capacity[i][j]).collect();
    if !utils.is_empty() {
        report.mean_link_util = utils.iter().sum::<f64>() / utils.len() as f64;
        report.max_link_util = utils.iter().cloned().fold(0.0, f64::max);
    }

    let mut fog_load = vec![0.0f64; model.switch_count];
    for (id, fa) in &next.flows {
        let Some(flow) = by_id.get(id) else { continue };
        for &(node, x) in &fa.vnf_placements {
            fog_load[node] += catalog.proc_per_unit.get(x).copied().unwrap_or(0.0) * flow.rate(slot);
        }
    }
    let fog_utils: Vec<f64> = (0..model.switch_count)
        .filter(|&i| next.fog_on.get(i).copied().unwrap_or(false) && model.fog_capacity(i) > 0.0)
        .map(|i| fog_load[i] / model.fog_capacity(i))
        .collect();
    if !fog_utils.is_empty() {
        report.mean_fog_util = fog_utils.iter().sum::<f64>() / fog_utils.len() as f64;
        report.max_fog_util = fog_utils.iter().cloned().fold(0.0, f64::max);
    }
    report
}

// --- combined report ---

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultViolation {
    pub flow: usize,
    pub fault: f64,
    pub max_fault: f64,
}

/// Full constraint evaluation of one slot's assignment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub link_capacity: Vec<LinkCapacityViolation>,
    pub conservation: Vec<ConservationViolation>,
    pub loops: Vec<LoopViolation>,
    pub delay: Vec<DelayViolation>,
    pub fault: Vec<FaultViolation>,
    pub sfc: SfcViolations,
    pub fog_state: Vec<FogOnViolation>,
    /// ON nodes serving nothing; legal but reported.
    pub wasteful_on: Vec<usize>,
    /// Flows present in the input but absent from the assignment (dropped).
    pub unplaced: Vec<usize>,
    pub objective_value: f64,
    pub energy_j: f64,
    pub side_effect: u64,
}

impl ConstraintReport {
    /// True when no hard constraint is violated (warnings and dropped flows
    /// do not count against feasibility of what was placed).
    pub fn pass(&self) -> bool {
        self.link_capacity.is_empty()
            && self.conservation.is_empty()
            && self.loops.is_empty()
            && self.delay.is_empty()
            && self.fault.is_empty()
            && self.sfc.is_empty()
            && self.fog_state.is_empty()
    }
}

/// Runs every check and computes the objective.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    prev: &Assignment,
    next: &Assignment,
    alpha: f64,
    beta: f64,
    slot: usize,
) -> Result<ConstraintReport, FeasibilityError> {
    check_weights(alpha, beta)?;
    let by_id: BTreeMap<usize, &FlowSpec> = flows.iter().map(|f| (f.id, f)).collect();
    let mut fault = Vec::new();
    for (id, fa) in &next.flows {
        let Some(flow) = by_id.get(id) else { continue };
        if let Ok(p) = path_fault_probability(model, flow, fa, slot) {
            if p > model.max_fault {
                fault.push(FaultViolation { flow: *id, fault: p, max_fault: model.max_fault });
            }
        }
    }
    let (fog_state, wasteful_on) = check_fog_on(model, next);
    let energy_j = energy(model, next);
    let ns = side_effect(prev, next);
    Ok(ConstraintReport {
        link_capacity: check_link_capacity(model, flows, next, slot),
        conservation: check_flow_conservation(model, flows, next),
        loops: check_loop_free(model, flows, next, slot),
        delay: check_delay(model, flows, catalog, next, slot),
        fault,
        sfc: check_sfc(model, flows, catalog, next, slot),
        fog_state,
        wasteful_on,
        unplaced: flows.iter().map(|f| f.id).filter(|id| !next.flows.contains_key(id)).collect(),
        objective_value: alpha * energy_j + beta * ns as f64,
        energy_j,
        side_effect: ns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{abilene, FogNode, NetworkModel};

    fn line_model(n: usize, capacity: f64) -> NetworkModel {
        let mut m = NetworkModel::empty(n);
        for i in 0..n - 1 {
            m.add_undirected_link(i, i + 1, capacity, 100.0);
        }
        m
    }

    fn flow(id: usize, source: usize, dest: usize, rate: f64, x: usize) -> FlowSpec {
        FlowSpec {
            id,
            source,
            dest,
            rate: vec![rate],
            requested: vec![vec![false; x]],
            max_delay_ms: 1e9,
        }
    }

    fn assignment_with(paths: &[(usize, Vec<usize>)], n: usize) -> Assignment {
        let mut a = Assignment::empty(n);
        for (id, path) in paths {
            a.flows.insert(*id, FlowAssignment::from_path(path));
        }
        a
    }

    #[test]
    fn capacity_under_limit_passes() {
        let m = line_model(3, 1000.0);
        let flows = vec![flow(0, 0, 2, 20.0, 1)];
        let a = assignment_with(&[(0, vec![0, 1, 2])], 3);
        assert!(check_link_capacity(&m, &flows, &a, 0).is_empty());
    }

    #[test]
    fn capacity_sum_over_flows_violates() {
        // Eleven 100 Mb/s flows over one 1000 Mb/s link: 1100 > 1000.
        let m = line_model(2, 1000.0);
        let flows: Vec<FlowSpec> = (0..11).map(|i| flow(i, 0, 1, 100.0, 1)).collect();
        let paths: Vec<(usize, Vec<usize>)> = (0..11).map(|i| (i, vec![0, 1])).collect();
        let a = assignment_with(&paths, 2);
        let v = check_link_capacity(&m, &flows, &a, 0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].link, (0, 1));
        assert_eq!(v[0].load, 1100.0);
        assert_eq!(v[0].limit, 1000.0);
    }

    #[test]
    fn capacity_respects_mu() {
        let mut m = line_model(2, 1000.0);
        m.max_utilization = 0.5;
        let flows = vec![flow(0, 0, 1, 300.0, 1), flow(1, 0, 1, 300.0, 1)];
        let a = assignment_with(&[(0, vec![0, 1]), (1, vec![0, 1])], 2);
        let v = check_link_capacity(&m, &flows, &a, 0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].load, 600.0);
        assert_eq!(v[0].limit, 500.0);
    }

    #[test]
    fn conservation_on_worked_path() {
        // Path 0 -> 2 -> 4 -> 3 -> 1 on a five-switch network.
        let mut m = NetworkModel::empty(5);
        for (a, b) in [(0, 2), (2, 4), (4, 3), (3, 1)] {
            m.add_undirected_link(a, b, 100.0, 1.0);
        }
        let flows = vec![flow(0, 0, 1, 1.0, 1)];
        let a = assignment_with(&[(0, vec![0, 2, 4, 3, 1])], 5);
        assert!(check_flow_conservation(&m, &flows, &a).is_empty());
        assert!(check_loop_free(&m, &flows, &a, 0).is_empty());
    }

    #[test]
    fn conservation_flags_empty_assignment() {
        let m = line_model(3, 100.0);
        let flows = vec![flow(0, 0, 2, 1.0, 1)];
        let mut a = Assignment::empty(3);
        a.flows.insert(0, FlowAssignment::default());
        let v = check_flow_conservation(&m, &flows, &a);
        let switches: Vec<usize> = v.iter().map(|x| x.switch).collect();
        assert_eq!(switches, vec![0, 2]);
    }

    #[test]
    fn detached_cycle_rejected_by_loop_check() {
        // Valid walk 0 -> 1 plus a detached 3-cycle 2 -> 3 -> 4 -> 2.
        let mut m = NetworkModel::empty(5);
        m.add_undirected_link(0, 1, 100.0, 1.0);
        m.add_undirected_link(2, 3, 100.0, 1.0);
        m.add_undirected_link(3, 4, 100.0, 1.0);
        m.add_undirected_link(4, 2, 100.0, 1.0);
        let flows = vec![flow(0, 0, 1, 1.0, 1)];
        let mut a = Assignment::empty(5);
        let mut fa = FlowAssignment::from_path(&[0, 1]);
        fa.links.extend([(2, 3), (3, 4), (4, 2)]);
        a.flows.insert(0, fa);
        // Conservation balances on the cycle, the walk check must reject it.
        assert!(check_flow_conservation(&m, &flows, &a).is_empty());
        let v = check_loop_free(&m, &flows, &a, 0);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0].error, PathError::DetachedLinks(3)));
    }

    #[test]
    fn branching_rejected() {
        let mut m = NetworkModel::empty(4);
        m.add_undirected_link(0, 1, 100.0, 1.0);
        m.add_undirected_link(0, 2, 100.0, 1.0);
        m.add_undirected_link(1, 3, 100.0, 1.0);
        m.add_undirected_link(2, 3, 100.0, 1.0);
        let flows = vec![flow(0, 0, 3, 1.0, 1)];
        let mut a = Assignment::empty(4);
        let mut fa = FlowAssignment::from_path(&[0, 1, 3]);
        fa.links.insert((0, 2));
        a.flows.insert(0, fa);
        let v = check_loop_free(&m, &flows, &a, 0);
        assert!(matches!(v[0].error, PathError::Branching(0)));
    }

    #[test]
    fn budget_formula() {
        let catalog = VnfCatalog::uniform(4, 1.0, 3.0);
        let mut f = flow(0, 0, 1, 10.0, 4);
        f.max_delay_ms = 500.0;
        f.requested = vec![vec![true, true, false, false]];
        assert_eq!(propagation_budget(&f, &catalog, 0), 440.0);
        f.requested = vec![vec![false; 4]];
        assert_eq!(propagation_budget(&f, &catalog, 0), 500.0);
    }

    #[test]
    fn delay_check_on_budget() {
        let m = line_model(6, 1000.0);
        let catalog = VnfCatalog::uniform(4, 1.0, 3.0);
        let mut f3 = flow(0, 0, 3, 10.0, 4);
        f3.max_delay_ms = 500.0;
        f3.requested = vec![vec![true, true, false, false]]; // budget 440
        let a3 = assignment_with(&[(0, vec![0, 1, 2, 3])], 6);
        assert!(check_delay(&m, &[f3.clone()], &catalog, &a3, 0).is_empty());

        let mut f5 = f3;
        f5.dest = 5;
        let a5 = assignment_with(&[(0, vec![0, 1, 2, 3, 4, 5])], 6);
        let v = check_delay(&m, &[f5], &catalog, &a5, 0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path_delay_ms, 500.0);
        assert_eq!(v[0].budget_ms, 440.0);
    }

    #[test]
    fn fault_probability_values() {
        let mut m = line_model(2, 100.0);
        m.fault_prob = vec![vec![0.1, 0.1]];
        let f = flow(0, 0, 1, 1.0, 1);
        let fa = FlowAssignment::from_path(&[0, 1]);
        let p = path_fault_probability(&m, &f, &fa, 0).unwrap();
        assert!((p - 0.19).abs() < 1e-12);

        m.fault_prob = vec![vec![0.0, 0.0]];
        assert_eq!(path_fault_probability(&m, &f, &fa, 0).unwrap(), 0.0);

        m.fault_prob = vec![vec![1.0, 0.0]];
        assert_eq!(path_fault_probability(&m, &f, &fa, 0).unwrap(), 1.0);
    }

    #[test]
    fn path_id_values() {
        // Path over switches {0, 2} with destination 2: 2^0 + 2^2 = 5.
        let f = flow(0, 0, 2, 1.0, 1);
        let fa = FlowAssignment::from_path(&[0, 2]);
        assert_eq!(path_id(&f, &fa).unwrap(), 5);

        // The worked path 0 -> 2 -> 4 -> 3 -> 1: 1 + 4 + 16 + 8 + 2 = 31.
        let f = flow(0, 0, 1, 1.0, 1);
        let fa = FlowAssignment::from_path(&[0, 2, 4, 3, 1]);
        assert_eq!(path_id(&f, &fa).unwrap(), 31);
    }

    #[test]
    fn path_id_ignores_visit_order() {
        let f = flow(0, 0, 3, 1.0, 1);
        let a = FlowAssignment::from_path(&[0, 1, 2, 3]);
        let b = FlowAssignment::from_path(&[0, 2, 1, 3]);
        assert_eq!(path_id(&f, &a).unwrap(), path_id(&f, &b).unwrap());
    }

    #[test]
    fn fault_table_matches_direct_product() {
        let mut m = line_model(4, 100.0);
        m.fault_prob = vec![vec![0.1, 0.2, 0.1, 0.3]];
        let table = fault_table(&m, 0, 12).unwrap();
        assert_eq!(table[0], 0.0);
        // r = 5 selects switches 0 and 2.
        assert!((table[5] - 0.19).abs() < 1e-12);
        // Supersets never have lower fault.
        for r in 0..table.len() {
            for i in 0..4 {
                let sup = r | (1 << i);
                assert!(table[sup] >= table[r] - 1e-15);
            }
        }
    }

    #[test]
    fn fault_table_respects_cap() {
        let m = NetworkModel::empty(15);
        assert!(matches!(
            fault_table(&m, 0, 12),
            Err(FeasibilityError::FaultTableTooLarge { n: 15, cap: 12 })
        ));
    }

    fn fog(host: usize, capacity: f64, supported: Vec<bool>) -> FogNode {
        FogNode {
            host_switch: host,
            capacity,
            supported_vnfs: supported,
            power_on_watts: 100.0,
            idle_fraction: 0.9,
        }
    }

    #[test]
    fn sfc_worked_example_passes() {
        // Path 0 -> 2 -> 4 -> 3 -> 1, VNF 2 at the source and VNF 1 at
        // switch 3, both supported.
        let mut m = NetworkModel::empty(5);
        for (a, b) in [(0, 2), (2, 4), (4, 3), (3, 1)] {
            m.add_undirected_link(a, b, 100.0, 1.0);
        }
        m.fog_nodes[0] = Some(fog(0, 100.0, vec![false, false, true, false]));
        m.fog_nodes[3] = Some(fog(3, 100.0, vec![false, true, false, false]));
        let catalog = VnfCatalog::uniform(4, 1.0, 3.0);
        let mut f = flow(0, 0, 1, 10.0, 4);
        f.requested = vec![vec![false, true, true, false]];
        let mut a = Assignment::empty(5);
        let mut fa = FlowAssignment::from_path(&[0, 2, 4, 3, 1]);
        fa.vnf_placements.extend([(0, 2), (3, 1)]);
        a.flows.insert(0, fa);
        a.set_fog_on_from_usage(5);
        let v = check_sfc(&m, &[f], &catalog, &a, 0);
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn sfc_flags_off_path_service() {
        let mut m = line_model(4, 100.0);
        m.fog_nodes[3] = Some(fog(3, 100.0, vec![true]));
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let mut f = flow(0, 0, 1, 1.0, 1);
        f.requested = vec![vec![true]];
        let mut a = Assignment::empty(4);
        let mut fa = FlowAssignment::from_path(&[0, 1]);
        fa.vnf_placements.insert((3, 0)); // switch 3 is never entered
        a.flows.insert(0, fa);
        a.set_fog_on_from_usage(4);
        let v = check_sfc(&m, &[f], &catalog, &a, 0);
        assert_eq!(v.off_path, vec![(0, 3, 0)]);
    }

    #[test]
    fn sfc_flags_capacity_overrun() {
        let mut m = line_model(2, 1000.0);
        m.fog_nodes[1] = Some(fog(1, 50.0, vec![true]));
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let mut f0 = flow(0, 0, 1, 30.0, 1);
        f0.requested = vec![vec![true]];
        let mut f1 = flow(1, 0, 1, 40.0, 1);
        f1.requested = vec![vec![true]];
        let mut a = Assignment::empty(2);
        for id in [0usize, 1] {
            let mut fa = FlowAssignment::from_path(&[0, 1]);
            fa.vnf_placements.insert((1, 0));
            a.flows.insert(id, fa);
        }
        a.set_fog_on_from_usage(2);
        let v = check_sfc(&m, &[f0, f1], &catalog, &a, 0);
        assert_eq!(v.node_capacity.len(), 1);
        assert_eq!(v.node_capacity[0], (1, 70.0, 50.0));
    }

    #[test]
    fn energy_sums_on_nodes() {
        let mut m = NetworkModel::empty(3);
        m.fog_nodes[0] = Some(fog(0, 1.0, vec![true]));
        m.fog_nodes[1] = Some(fog(1, 1.0, vec![true]));
        m.fog_nodes[2] = Some(fog(2, 1.0, vec![true]));
        m.fog_nodes[0].as_mut().unwrap().power_on_watts = 100.0;
        m.fog_nodes[1].as_mut().unwrap().power_on_watts = 200.0;
        m.fog_nodes[2].as_mut().unwrap().power_on_watts = 300.0;
        let mut a = Assignment::empty(3);
        assert_eq!(energy(&m, &a), 0.0);
        a.fog_on = vec![true, false, true];
        assert_eq!(energy(&m, &a), 400.0);
    }

    #[test]
    fn side_effect_counts_changed_entries() {
        let n = 6;
        let a = assignment_with(&[(0, vec![0, 1, 2])], n);
        assert_eq!(side_effect(&a, &a), 0);
        let b = assignment_with(&[(0, vec![0, 3, 4, 2])], n);
        assert_eq!(side_effect(&a, &b), 5); // 2 removals + 3 additions
        let empty = Assignment::empty(n);
        assert_eq!(side_effect(&empty, &b), 3);
    }

    #[test]
    fn fog_on_rule() {
        let mut m = line_model(2, 100.0);
        m.fog_nodes[1] = Some(fog(1, 10.0, vec![true]));
        let mut a = Assignment::empty(2);
        let mut fa = FlowAssignment::from_path(&[0, 1]);
        fa.vnf_placements.insert((1, 0));
        a.flows.insert(0, fa);
        let (violations, wasteful) = check_fog_on(&m, &a);
        assert_eq!(violations.len(), 1);
        assert!(wasteful.is_empty());

        a.fog_on = vec![true, true];
        let (violations, wasteful) = check_fog_on(&m, &a);
        assert!(violations.is_empty());
        assert_eq!(wasteful, vec![0]);
    }

    #[test]
    fn objective_weighting() {
        let mut m = NetworkModel::empty(6);
        m.add_undirected_link(0, 1, 100.0, 1.0);
        for i in 0..4 {
            m.fog_nodes[i] = Some(fog(i, 1.0, vec![true]));
            m.fog_nodes[i].as_mut().unwrap().power_on_watts = 100.0;
        }
        let prev = Assignment::empty(6);
        // Energy 400, side effect 6.
        let mut next = assignment_with(&[(0, vec![0, 1])], 6);
        next.flows.insert(1, FlowAssignment::from_path(&[0, 1]));
        next.flows.insert(2, FlowAssignment::from_path(&[1, 0]));
        next.flows.insert(3, FlowAssignment::from_path(&[1, 0]));
        next.flows.insert(4, FlowAssignment::from_path(&[0, 1]));
        next.flows.insert(5, FlowAssignment::from_path(&[0, 1]));
        next.fog_on = vec![true, true, true, true, false, false];
        assert_eq!(objective(&m, &prev, &next, 0.5, 0.5).unwrap(), 203.0);
        assert_eq!(objective(&m, &prev, &next, 1.0, 0.0).unwrap(), 400.0);
        assert_eq!(objective(&m, &prev, &next, 0.0, 1.0).unwrap(), 6.0);
        assert!(objective(&m, &prev, &next, 0.7, 0.7).is_err());
    }

    #[test]
    fn metrics_basics() {
        let mut m = line_model(3, 1000.0);
        m.fog_nodes[1] = Some(fog(1, 100.0, vec![true]));
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let mut f = flow(0, 0, 2, 200.0, 1);
        f.requested = vec![vec![true]];
        let mut a = Assignment::empty(3);
        let mut fa = FlowAssignment::from_path(&[0, 1, 2]);
        fa.vnf_placements.insert((1, 0));
        a.flows.insert(0, fa);
        a.set_fog_on_from_usage(3);
        let prev = Assignment::empty(3);
        let r = metrics(&m, &[f], &catalog, &prev, &a, 0);
        assert_eq!(r.mean_path_len, 2.0);
        assert_eq!(r.mean_link_util, 0.2);
        assert_eq!(r.max_link_util, 0.2);
        assert_eq!(r.side_effect, 2);
        assert_eq!(r.flows_placed, 1);
        // The only ON node runs at 200/100 of capacity; IDLE nodes excluded.
        assert_eq!(r.mean_fog_util, 2.0);
    }

    #[test]
    fn evaluate_accepts_consistent_assignment() {
        let m = abilene();
        let catalog = VnfCatalog::uniform(10, 1.0, 3.0);
        let f = flow(0, 0, 3, 10.0, 10);
        let mut a = Assignment::empty(11);
        a.flows.insert(0, FlowAssignment::from_path(&[0, 3]));
        let prev = Assignment::empty(11);
        let report = evaluate(&m, &[f], &catalog, &prev, &a, 0.5, 0.5, 0).unwrap();
        assert!(report.pass(), "{report:?}");
        assert_eq!(report.side_effect, 1);
    }
}
