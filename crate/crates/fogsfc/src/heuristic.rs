//! The two fog-supported energy-aware SFC heuristics: a recursive
//! backtracking walk and a deterministic greedy placement loop, plus the
//! fault-based shortest-path and energy-aware next-hub subroutines they use.
//!
//! Both solvers route flows sequentially against shared residual link and
//! Fog Node capacity. Every emitted assignment satisfies the full constraint
//! set by construction: capacity and delay are tracked during the walk and a
//! flow whose walk cannot stay within the fault threshold is dropped rather
//! than placed.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::feasibility::propagation_budget;
use crate::model::{Assignment, FlowAssignment, FlowSpec, NetworkModel, VnfCatalog};

/// Why a flow could not be placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropReason {
    /// Processing time alone exceeds the flow's delay budget.
    DelayBudget,
    /// No walk kept the end-to-end fault probability within the threshold.
    FaultBudget,
    /// A requested VNF has no reachable node with support and capacity left.
    NoServiceCapacity,
    /// The destination is unreachable on the residual topology.
    Unreachable,
    /// Backtracking exhausted every branch without a feasible walk.
    Exhausted,
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DropReason::DelayBudget => "delay-budget",
            DropReason::FaultBudget => "fault-budget",
            DropReason::NoServiceCapacity => "no-service-capacity",
            DropReason::Unreachable => "unreachable",
            DropReason::Exhausted => "exhausted",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedFlow {
    pub flow: usize,
    pub reason: DropReason,
}

/// Result of a heuristic placement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicOutcome {
    pub assignment: Assignment,
    pub dropped: Vec<DroppedFlow>,
}

/// State of one flow's walk: position, services still owed, residual
/// resources, accumulated survival probability, and the chosen path so far.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub current: usize,
    pub dest: usize,
    pub remaining: BTreeSet<usize>,
    /// Free capacity per directed link (already scaled by `mu` and net of
    /// other flows' loads).
    pub residual_bandwidth: Vec<Vec<f64>>,
    /// Free processing units per Fog Node.
    pub residual_capacity: Vec<f64>,
    /// Survival probability of the path so far (product over its switches).
    pub survival: f64,
    /// Chosen path, starting at the flow source.
    pub path: Vec<usize>,
    /// `(switch, vnf)` services delivered so far.
    pub placements: Vec<(usize, usize)>,
    /// Flow rate in the decided slot.
    pub rate: f64,
    /// Propagation budget still available, in ms.
    pub delay_budget_ms: f64,
}

impl SearchState {
    /// Initial state for a flow against the given residual resources.
    pub fn for_flow(
        model: &NetworkModel,
        catalog: &VnfCatalog,
        flow: &FlowSpec,
        slot: usize,
        residual_bandwidth: Vec<Vec<f64>>,
        residual_capacity: Vec<f64>,
    ) -> Self {
        Self {
            current: flow.source,
            dest: flow.dest,
            remaining: flow.requested_vnfs(slot).into_iter().collect(),
            residual_bandwidth,
            residual_capacity,
            survival: 1.0 - model.fault_prob(slot, flow.source),
            path: vec![flow.source],
            placements: Vec::new(),
            rate: flow.rate(slot),
            delay_budget_ms: propagation_budget(flow, catalog, slot),
        }
    }

    fn visited(&self, node: usize) -> bool {
        self.path.contains(&node)
    }
}

/// A completed walk: the node path, delivered services, and path survival.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSolution {
    pub path: Vec<usize>,
    pub placements: Vec<(usize, usize)>,
    pub survival: f64,
}

impl WalkSolution {
    pub fn to_flow_assignment(&self) -> FlowAssignment {
        let mut fa = FlowAssignment::from_path(&self.path);
        fa.vnf_placements.extend(self.placements.iter().copied());
        fa
    }
}

// --- fault-based shortest paths ---

fn node_weight(model: &NetworkModel, slot: usize, node: usize) -> f64 {
    let p = model.fault_prob(slot, node);
    if p >= 1.0 {
        f64::INFINITY
    } else {
        -(1.0 - p).ln()
    }
}

/// Single-source shortest paths under the additive node weight
/// `w_i = -ln(1 - p_i)`, so a minimum-distance path maximizes survival.
/// `distance[v]` is `-ln(survival)` of the best path including both
/// endpoints; unreachable nodes get `f64::INFINITY`. Ties resolve by node
/// index through the deterministic pop order.
pub fn shortest_path_fault(
    model: &NetworkModel,
    from: usize,
    slot: usize,
) -> Vec<(f64, Option<usize>)> {
    let free = model
        .link_capacity
        .iter()
        .map(|row| row.iter().map(|&b| if b > 0.0 { f64::INFINITY } else { 0.0 }).collect())
        .collect::<Vec<Vec<f64>>>();
    let blocked = vec![false; model.switch_count];
    let (dist, pred) = fault_dijkstra(model, slot, from, 0.0, &free, &blocked, None);
    let w0 = node_weight(model, slot, from);
    dist.into_iter()
        .zip(pred)
        .map(|(d, p)| (if d.is_finite() { d + w0 } else { d }, p))
        .collect()
}

/// Dijkstra on the residual graph. `distance[v]` is the sum of node weights
/// along the best `start -> v` walk excluding the start node itself, so
/// segment survivals compose by multiplication. Links need `free > rate` (or
/// `>= rate` for positive rates), blocked nodes cannot be entered, and when
/// `sink` is set its outgoing links are ignored so it can only terminate a
/// walk.
fn fault_dijkstra(
    model: &NetworkModel,
    slot: usize,
    start: usize,
    rate: f64,
    free: &[Vec<f64>],
    blocked: &[bool],
    sink: Option<usize>,
) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = model.switch_count;
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    dist[start] = 0.0;
    loop {
        let mut u = None;
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !done[v] && dist[v] < best {
                best = dist[v];
                u = Some(v);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        if Some(u) == sink {
            continue;
        }
        for v in 0..n {
            if done[v] || blocked[v] || !model.has_link(u, v) || free[u][v] < rate {
                continue;
            }
            let w = node_weight(model, slot, v);
            if !w.is_finite() {
                continue;
            }
            let cand = dist[u] + w;
            if cand < dist[v] {
                dist[v] = cand;
                pred[v] = Some(u);
            }
        }
    }
    (dist, pred)
}

/// Distance from every node to its nearest service-capable node under the
/// fault metric (propagated over reversed links). Used to steer a walk toward
/// somewhere a needed VNF can actually run.
fn distance_to_service(
    model: &NetworkModel,
    slot: usize,
    rate: f64,
    free: &[Vec<f64>],
    blocked: &[bool],
    servicers: &BTreeSet<usize>,
) -> Vec<f64> {
    let n = model.switch_count;
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    for &s in servicers {
        if !blocked[s] {
            dist[s] = 0.0;
        }
    }
    loop {
        let mut u = None;
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !done[v] && dist[v] < best {
                best = dist[v];
                u = Some(v);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        let w_u = node_weight(model, slot, u);
        if !w_u.is_finite() {
            continue;
        }
        for v in 0..n {
            // reversed edge: a real link v -> u
            if done[v] || blocked[v] || !model.has_link(v, u) || free[v][u] < rate {
                continue;
            }
            let cand = dist[u] + w_u;
            if cand < dist[v] {
                dist[v] = cand;
            }
        }
    }
    dist
}

fn reconstruct(pred: &[Option<usize>], start: usize, target: usize) -> Vec<usize> {
    let mut seq = vec![target];
    let mut cur = target;
    while cur != start {
        let p = pred[cur].expect("predecessor chain reaches start");
        seq.push(p);
        cur = p;
    }
    seq.reverse();
    seq
}

// --- service capability ---

fn can_serve_any(
    model: &NetworkModel,
    catalog: &VnfCatalog,
    node: usize,
    remaining: &BTreeSet<usize>,
    free_capacity: f64,
    rate: f64,
) -> bool {
    remaining.iter().any(|&x| {
        model.fog_supports(node, x) && free_capacity >= catalog.proc_per_unit[x] * rate
    })
}

/// How many of the still-needed VNFs this node could deliver, greedily by
/// largest processing demand within the free capacity.
fn servable_count(
    model: &NetworkModel,
    catalog: &VnfCatalog,
    node: usize,
    remaining: &BTreeSet<usize>,
    free_capacity: f64,
    rate: f64,
) -> usize {
    let mut order: Vec<usize> = remaining
        .iter()
        .copied()
        .filter(|&x| model.fog_supports(node, x))
        .collect();
    order.sort_by(|&a, &b| {
        catalog.proc_per_unit[b].total_cmp(&catalog.proc_per_unit[a]).then(a.cmp(&b))
    });
    let mut free = free_capacity;
    let mut count = 0;
    for x in order {
        let demand = catalog.proc_per_unit[x] * rate;
        if free >= demand {
            free -= demand;
            count += 1;
        }
    }
    count
}

fn can_serve_all(
    model: &NetworkModel,
    catalog: &VnfCatalog,
    node: usize,
    remaining: &BTreeSet<usize>,
    free_capacity: f64,
    rate: f64,
) -> bool {
    let mut need = 0.0;
    for &x in remaining {
        if !model.fog_supports(node, x) {
            return false;
        }
        need += catalog.proc_per_unit[x] * rate;
    }
    free_capacity >= need
}

/// Delivers every still-needed VNF the node supports, capacity permitting,
/// taking the largest processing demand first. Returns the delivered pairs.
fn deliver_services(
    model: &NetworkModel,
    catalog: &VnfCatalog,
    node: usize,
    remaining: &mut BTreeSet<usize>,
    free_capacity: &mut f64,
    rate: f64,
) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = remaining.iter().copied().collect();
    order.sort_by(|&a, &b| {
        catalog.proc_per_unit[b]
            .total_cmp(&catalog.proc_per_unit[a])
            .then(a.cmp(&b))
    });
    let mut delivered = Vec::new();
    for x in order {
        let demand = catalog.proc_per_unit[x] * rate;
        if model.fog_supports(node, x) && *free_capacity >= demand {
            *free_capacity -= demand;
            remaining.remove(&x);
            delivered.push((node, x));
        }
    }
    delivered
}

/// Picks the next hub for a walk that still owes services: among nodes
/// directly connected to the current node that can host a needed VNF, prefer
/// already-ON Fog Nodes (zero incremental energy), then minimum power draw,
/// ties by node index. Returns `None` when no adjacent node qualifies.
pub fn energy_aware_next_hub(
    model: &NetworkModel,
    state: &SearchState,
    catalog: &VnfCatalog,
    on: &[bool],
) -> Option<usize> {
    let cn = state.current;
    let mut best: Option<(f64, usize)> = None;
    for nb in model.neighbors(cn) {
        if state.visited(nb) || state.residual_bandwidth[cn][nb] < state.rate {
            continue;
        }
        if !can_serve_any(model, catalog, nb, &state.remaining, state.residual_capacity[nb], state.rate)
        {
            continue;
        }
        let powered = on.get(nb).copied().unwrap_or(false)
            || state.placements.iter().any(|&(i, _)| i == nb);
        let cost = if powered {
            0.0
        } else {
            model.fog(nb).map(|f| f.power_on_watts).unwrap_or(f64::INFINITY)
        };
        if best.map_or(true, |(c, b)| cost < c || (cost == c && nb < b)) {
            best = Some((cost, nb));
        }
    }
    best.map(|(_, nb)| nb)
}

// --- recursive walk ---

/// Recursive fault-bounded walk. While services are owed it steps to the
/// energy-aware next hub (falling back to progress toward the nearest node
/// that can serve); once the request set is empty it follows shortest-path
/// hops to the destination, backtracking whenever the survival bound or the
/// residual resources rule a branch out.
pub fn hfes_recursive(
    state: &SearchState,
    model: &NetworkModel,
    catalog: &VnfCatalog,
    max_fault: f64,
    slot: usize,
    on: &[bool],
) -> Result<WalkSolution, DropReason> {
    if state.delay_budget_ms < 0.0 {
        return Err(DropReason::DelayBudget);
    }
    let mut work = state.clone();
    match walk(&mut work, model, catalog, max_fault, slot, on) {
        Some(solution) => Ok(solution),
        None => {
            if state.survival < 1.0 - max_fault {
                Err(DropReason::FaultBudget)
            } else {
                Err(DropReason::Exhausted)
            }
        }
    }
}

fn walk(
    state: &SearchState,
    model: &NetworkModel,
    catalog: &VnfCatalog,
    max_fault: f64,
    slot: usize,
    on: &[bool],
) -> Option<WalkSolution> {
    // Stopping criterion: the walk so far must keep fault within threshold.
    if state.survival < 1.0 - max_fault {
        return None;
    }
    if state.remaining.is_empty() && state.current == state.dest {
        return Some(WalkSolution {
            path: state.path.clone(),
            placements: state.placements.clone(),
            survival: state.survival,
        });
    }
    // The destination cannot be left once entered.
    if state.current == state.dest {
        return None;
    }
    if state.path.len() > model.switch_count {
        return None;
    }

    let n = model.switch_count;
    let cn = state.current;
    let mut blocked = vec![false; n];
    for &v in &state.path {
        blocked[v] = true;
    }

    let candidates: Vec<usize> = if state.remaining.is_empty() {
        // Hop distance to the destination over the residual graph steers the
        // shortest-path phase; low-fault neighbors break ties.
        let hops = hop_distance_to(model, state.dest, state.rate, &state.residual_bandwidth, &blocked);
        let mut nbs: Vec<usize> = model
            .neighbors(cn)
            .filter(|&nb| {
                !state.visited(nb)
                    && state.residual_bandwidth[cn][nb] >= state.rate
                    && model.link_delay[cn][nb] <= state.delay_budget_ms
                    && hops[nb] < usize::MAX
            })
            .collect();
        nbs.sort_by(|&a, &b| {
            hops[a]
                .cmp(&hops[b])
                .then(node_weight(model, slot, a).total_cmp(&node_weight(model, slot, b)))
                .then(a.cmp(&b))
        });
        nbs
    } else {
        let mut ordered = Vec::new();
        // Primary: adjacent nodes that can host a needed service, cheapest
        // incremental energy first.
        let mut service: Vec<(f64, usize)> = model
            .neighbors(cn)
            .filter(|&nb| {
                !state.visited(nb)
                    && state.residual_bandwidth[cn][nb] >= state.rate
                    && model.link_delay[cn][nb] <= state.delay_budget_ms
                    && can_serve_any(
                        model,
                        catalog,
                        nb,
                        &state.remaining,
                        state.residual_capacity[nb],
                        state.rate,
                    )
            })
            .map(|nb| {
                let powered = on.get(nb).copied().unwrap_or(false)
                    || state.placements.iter().any(|&(i, _)| i == nb);
                let cost =
                    if powered { 0.0 } else { model.fog(nb).map(|f| f.power_on_watts).unwrap_or(0.0) };
                (cost, nb)
            })
            .collect();
        service.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        ordered.extend(service.iter().map(|&(_, nb)| nb));

        // Fallback: make progress toward the nearest node that can serve.
        let servicers: BTreeSet<usize> = (0..n)
            .filter(|&v| {
                !blocked[v]
                    && can_serve_any(
                        model,
                        catalog,
                        v,
                        &state.remaining,
                        state.residual_capacity[v],
                        state.rate,
                    )
            })
            .collect();
        let toward =
            distance_to_service(model, slot, state.rate, &state.residual_bandwidth, &blocked, &servicers);
        let mut transit: Vec<(f64, usize)> = model
            .neighbors(cn)
            .filter(|&nb| {
                nb != state.dest
                    && !state.visited(nb)
                    && !ordered.contains(&nb)
                    && state.residual_bandwidth[cn][nb] >= state.rate
                    && model.link_delay[cn][nb] <= state.delay_budget_ms
                    && toward[nb].is_finite()
            })
            .map(|nb| (toward[nb] + node_weight(model, slot, nb), nb))
            .collect();
        transit.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        ordered.extend(transit.iter().map(|&(_, nb)| nb));
        ordered
    };

    for nb in candidates {
        let mut child = state.clone();
        child.residual_bandwidth[cn][nb] -= child.rate;
        child.delay_budget_ms -= model.link_delay[cn][nb];
        child.survival *= 1.0 - model.fault_prob(slot, nb);
        child.path.push(nb);
        child.current = nb;
        if !child.remaining.is_empty() {
            let mut free = child.residual_capacity[nb];
            let delivered =
                deliver_services(model, catalog, nb, &mut child.remaining, &mut free, child.rate);
            child.residual_capacity[nb] = free;
            child.placements.extend(delivered);
        }
        if let Some(solution) = walk(&child, model, catalog, max_fault, slot, on) {
            return Some(solution);
        }
    }
    None
}

/// BFS hop counts to `dest` over usable reversed links; `usize::MAX` when
/// unreachable.
/// Minimum propagation delay from every node to `dest` (reverse Dijkstra on
/// link delays over usable links); `INFINITY` when unreachable.
fn delay_to_dest(
    model: &NetworkModel,
    dest: usize,
    rate: f64,
    free: &[Vec<f64>],
    blocked: &[bool],
) -> Vec<f64> {
    let n = model.switch_count;
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[dest] = 0.0;
    loop {
        let mut u = None;
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !done[v] && dist[v] < best {
                best = dist[v];
                u = Some(v);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        for v in 0..n {
            if done[v] || blocked[v] || !model.has_link(v, u) || free[v][u] < rate {
                continue;
            }
            let cand = dist[u] + model.link_delay[v][u];
            if cand < dist[v] {
                dist[v] = cand;
            }
        }
    }
    dist
}

/// True when `dest` is reachable from `from` over links with enough free
/// capacity, without entering any blocked node.
fn dest_reachable(
    model: &NetworkModel,
    from: usize,
    dest: usize,
    rate: f64,
    free: &[Vec<f64>],
    blocked: &[bool],
) -> bool {
    if from == dest {
        return true;
    }
    let n = model.switch_count;
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if seen[v] || !model.has_link(u, v) || free[u][v] < rate {
                continue;
            }
            if v == dest {
                return true;
            }
            if !blocked[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    false
}

fn hop_distance_to(
    model: &NetworkModel,
    dest: usize,
    rate: f64,
    free: &[Vec<f64>],
    blocked: &[bool],
) -> Vec<usize> {
    let n = model.switch_count;
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[dest] = 0;
    queue.push_back(dest);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if dist[v] == usize::MAX
                && !blocked[v]
                && model.has_link(v, u)
                && free[v][u] >= rate
            {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

// --- greedy walk ---

fn greedy_route_flow(
    model: &NetworkModel,
    catalog: &VnfCatalog,
    flow: &FlowSpec,
    slot: usize,
    res: &SolverState,
    max_fault: f64,
) -> Result<WalkSolution, DropReason> {
    let n = model.switch_count;
    let rate = flow.rate(slot);
    let budget = propagation_budget(flow, catalog, slot);
    if budget < 0.0 {
        return Err(DropReason::DelayBudget);
    }

    let mut cn = flow.source;
    let mut path = vec![flow.source];
    let mut visited = vec![false; n];
    visited[flow.source] = true;
    let mut survival = 1.0 - model.fault_prob(slot, flow.source);
    let mut delay_used = 0.0;
    let mut remaining: BTreeSet<usize> = flow.requested_vnfs(slot).into_iter().collect();
    let mut placements: Vec<(usize, usize)> = Vec::new();
    let mut local_fog_used: BTreeMap<usize, f64> = BTreeMap::new();
    let mut local_on: BTreeSet<usize> = BTreeSet::new();

    if survival < 1.0 - max_fault {
        return Err(DropReason::FaultBudget);
    }

    while !remaining.is_empty() {
        // Links below the required free capacity are pruned, then fault-based
        // shortest paths from the current node rank the reachable nodes.
        let mut blocked = visited.clone();
        blocked[cn] = false;
        let (dist, pred) = fault_dijkstra(
            model,
            slot,
            cn,
            rate,
            &res.link_free,
            &blocked,
            Some(flow.dest),
        );
        // Completion screens: a hub is only useful when the walk can still
        // reach the destination from it within the delay and fault budgets.
        let tail_delay = delay_to_dest(model, flow.dest, rate, &res.link_free, &blocked);
        let tail_fault = distance_to_service(
            model,
            slot,
            rate,
            &res.link_free,
            &blocked,
            &BTreeSet::from([flow.dest]),
        );
        let free_at = |local: &BTreeMap<usize, f64>, v: usize| {
            res.fog_free[v] - local.get(&v).copied().unwrap_or(0.0)
        };
        // Rank service hubs by incremental energy, then by how much of the
        // remaining request they can deliver (more is better), then by fault
        // distance from the current node, then by index.
        let mut candidates: Vec<(f64, usize, f64, usize)> = (0..n)
            .filter(|&v| v == cn || dist[v].is_finite())
            .filter(|&v| !visited[v] || v == cn)
            .filter(|&v| {
                if v == flow.dest {
                    // The walk ends at the destination, so it only qualifies
                    // when it can finish the whole request.
                    can_serve_all(model, catalog, v, &remaining, free_at(&local_fog_used, v), rate)
                } else {
                    can_serve_any(model, catalog, v, &remaining, free_at(&local_fog_used, v), rate)
                }
            })
            .map(|v| {
                let powered = res.on[v] || local_on.contains(&v);
                let cost =
                    if powered { 0.0 } else { model.fog(v).map(|f| f.power_on_watts).unwrap_or(0.0) };
                let coverage =
                    servable_count(model, catalog, v, &remaining, free_at(&local_fog_used, v), rate);
                (cost, remaining.len() - coverage, if v == cn { 0.0 } else { dist[v] }, v)
            })
            .collect();
        candidates.sort_by(|a, b| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)).then(a.3.cmp(&b.3))
        });

        let mut committed = false;
        for &(_, _, _, hub) in &candidates {
            let segment = if hub == cn { vec![cn] } else { reconstruct(&pred, cn, hub) };
            let seg_delay: f64 =
                segment.windows(2).map(|w| model.link_delay[w[0]][w[1]]).sum();
            if delay_used + seg_delay > budget {
                continue;
            }
            let mut seg_survival = survival;
            for &v in segment.iter().skip(1) {
                seg_survival *= 1.0 - model.fault_prob(slot, v);
            }
            if seg_survival < 1.0 - max_fault {
                continue;
            }
            // A hub that strands the walk (no way to finish at the
            // destination within the budgets) is no hub at all.
            if hub != flow.dest {
                if delay_used + seg_delay + tail_delay[hub] > budget {
                    continue;
                }
                if seg_survival * (-tail_fault[hub]).exp() < 1.0 - max_fault {
                    continue;
                }
                let mut after = visited.clone();
                for &v in segment.iter().skip(1) {
                    after[v] = true;
                }
                if !dest_reachable(model, hub, flow.dest, rate, &res.link_free, &after) {
                    continue;
                }
            }
            // Commit the segment and deliver at the hub.
            for &v in segment.iter().skip(1) {
                visited[v] = true;
                path.push(v);
            }
            delay_used += seg_delay;
            survival = seg_survival;
            cn = hub;
            let mut free = free_at(&local_fog_used, hub);
            let before = free;
            let delivered =
                deliver_services(model, catalog, hub, &mut remaining, &mut free, rate);
            *local_fog_used.entry(hub).or_insert(0.0) += before - free;
            if !delivered.is_empty() {
                local_on.insert(hub);
            }
            placements.extend(delivered);
            committed = true;
            break;
        }
        if !committed {
            let any_servicer = (0..n).any(|v| {
                !visited[v]
                    && can_serve_any(model, catalog, v, &remaining, free_at(&local_fog_used, v), rate)
            });
            return Err(if any_servicer {
                DropReason::FaultBudget
            } else {
                DropReason::NoServiceCapacity
            });
        }
    }

    if cn != flow.dest {
        let mut blocked = visited.clone();
        blocked[cn] = false;
        let (dist, pred) =
            fault_dijkstra(model, slot, cn, rate, &res.link_free, &blocked, Some(flow.dest));
        if !dist[flow.dest].is_finite() {
            return Err(DropReason::Unreachable);
        }
        let segment = reconstruct(&pred, cn, flow.dest);
        let seg_delay: f64 = segment.windows(2).map(|w| model.link_delay[w[0]][w[1]]).sum();
        if delay_used + seg_delay > budget {
            return Err(DropReason::DelayBudget);
        }
        let mut seg_survival = survival;
        for &v in segment.iter().skip(1) {
            seg_survival *= 1.0 - model.fault_prob(slot, v);
        }
        if seg_survival < 1.0 - max_fault {
            return Err(DropReason::FaultBudget);
        }
        for &v in segment.iter().skip(1) {
            visited[v] = true;
            path.push(v);
        }
        survival = seg_survival;
    }

    Ok(WalkSolution { path, placements, survival })
}

// --- sequential multi-flow drivers ---

#[derive(Debug, Clone)]
struct SolverState {
    /// Free capacity per directed link: `mu * B - load`.
    link_free: Vec<Vec<f64>>,
    /// Free processing units per Fog Node.
    fog_free: Vec<f64>,
    /// Fog Nodes already powered on by earlier placements.
    on: Vec<bool>,
}

impl SolverState {
    fn fresh(model: &NetworkModel) -> Self {
        let n = model.switch_count;
        let link_free = (0..n)
            .map(|i| (0..n).map(|j| model.max_utilization * model.link_capacity[i][j]).collect())
            .collect();
        let fog_free = (0..n).map(|i| model.fog_capacity(i)).collect();
        Self { link_free, fog_free, on: vec![false; n] }
    }

    fn commit(&mut self, model: &NetworkModel, catalog: &VnfCatalog, flow: &FlowSpec, fa: &FlowAssignment, slot: usize) {
        let _ = model;
        let rate = flow.rate(slot);
        for &(i, j) in &fa.links {
            self.link_free[i][j] -= rate;
        }
        for &(node, x) in &fa.vnf_placements {
            self.fog_free[node] -= catalog.proc_per_unit[x] * rate;
            self.on[node] = true;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Algorithm {
    Greedy,
    Recursive,
}

/// A pinned flow keeps its previous route only if that route is still fully
/// valid on the current model and within the fault/delay budgets; otherwise
/// it is re-placed like a fresh flow.
fn pinned_route_valid(
    model: &NetworkModel,
    catalog: &VnfCatalog,
    flow: &FlowSpec,
    fa: &FlowAssignment,
    slot: usize,
) -> bool {
    if fa.links.is_empty() {
        return false;
    }
    for &(i, j) in &fa.links {
        if !model.has_link(i, j) {
            return false;
        }
    }
    let view = match crate::feasibility::PathView::from_assignment(model, flow, fa, slot) {
        Ok(v) => v,
        Err(_) => return false,
    };
    if view.fault_prob > model.max_fault {
        return false;
    }
    let delay: f64 = fa.links.iter().map(|&(i, j)| model.link_delay[i][j]).sum();
    if delay > propagation_budget(flow, catalog, slot) {
        return false;
    }
    let requested = flow.requested_vnfs(slot);
    let served: BTreeSet<usize> = fa.vnf_placements.iter().map(|&(_, x)| x).collect();
    if requested.iter().any(|x| !served.contains(x)) || served.len() != fa.vnf_placements.len() {
        return false;
    }
    fa.vnf_placements.iter().all(|&(node, x)| model.fog_supports(node, x))
}

fn place_sequential(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    prev: &Assignment,
    replace: Option<&BTreeSet<usize>>,
    algorithm: Algorithm,
    slot: usize,
) -> HeuristicOutcome {
    let n = model.switch_count;
    let mut state = SolverState::fresh(model);
    let mut assignment = Assignment::empty(n);
    let mut dropped = Vec::new();

    let mut to_route: Vec<&FlowSpec> = Vec::new();
    for flow in flows {
        let pin = match replace {
            Some(set) => !set.contains(&flow.id),
            None => false,
        };
        if pin {
            if let Some(fa) = prev.flows.get(&flow.id) {
                if pinned_route_valid(model, catalog, flow, fa, slot) {
                    state.commit(model, catalog, flow, fa, slot);
                    assignment.flows.insert(flow.id, fa.clone());
                    continue;
                }
            }
        }
        to_route.push(flow);
    }
    to_route.sort_by(|a, b| b.rate(slot).total_cmp(&a.rate(slot)).then(a.id.cmp(&b.id)));

    for flow in to_route {
        let result = match algorithm {
            Algorithm::Greedy => {
                greedy_route_flow(model, catalog, flow, slot, &state, model.max_fault)
            }
            Algorithm::Recursive => {
                let search = SearchState::for_flow(
                    model,
                    catalog,
                    flow,
                    slot,
                    state.link_free.clone(),
                    state.fog_free.clone(),
                );
                hfes_recursive(&search, model, catalog, model.max_fault, slot, &state.on)
            }
        };
        match result {
            Ok(solution) => {
                let fa = solution.to_flow_assignment();
                state.commit(model, catalog, flow, &fa, slot);
                assignment.flows.insert(flow.id, fa);
            }
            Err(reason) => dropped.push(DroppedFlow { flow: flow.id, reason }),
        }
    }
    assignment.set_fog_on_from_usage(n);
    HeuristicOutcome { assignment, dropped }
}

/// Greedy non-recursive placement: flows are routed sequentially, each one
/// walking from service hub to service hub (cheapest incremental energy
/// first) and then taking the minimum-fault path to its destination.
///
/// `prev` is the previous slot's assignment; it does not influence routing
/// here (the side-effect trade-off is the exact solver's job) but callers use
/// it for side-effect accounting, and [`hfes_greedy_pinned`] keeps unaffected
/// flows on their `prev` routes during failure recovery.
pub fn hfes_greedy(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    prev: &Assignment,
) -> HeuristicOutcome {
    place_sequential(model, flows, catalog, prev, None, Algorithm::Greedy, 0)
}

/// Greedy placement for a specific slot.
pub fn hfes_greedy_slot(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    prev: &Assignment,
    slot: usize,
) -> HeuristicOutcome {
    place_sequential(model, flows, catalog, prev, None, Algorithm::Greedy, slot)
}

/// Greedy placement that keeps every flow outside `replace` pinned to its
/// previous route (provided that route is still valid) and re-places only the
/// flows in `replace`.
pub fn hfes_greedy_pinned(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    prev: &Assignment,
    replace: &BTreeSet<usize>,
    slot: usize,
) -> HeuristicOutcome {
    place_sequential(model, flows, catalog, prev, Some(replace), Algorithm::Greedy, slot)
}

/// Recursive placement over all flows (sequential, shared residual state).
pub fn solve_recursive(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    prev: &Assignment,
    slot: usize,
) -> HeuristicOutcome {
    place_sequential(model, flows, catalog, prev, None, Algorithm::Recursive, slot)
}

/// Recursive placement with pinning, mirroring [`hfes_greedy_pinned`].
pub fn solve_recursive_pinned(
    model: &NetworkModel,
    flows: &[FlowSpec],
    catalog: &VnfCatalog,
    prev: &Assignment,
    replace: &BTreeSet<usize>,
    slot: usize,
) -> HeuristicOutcome {
    place_sequential(model, flows, catalog, prev, Some(replace), Algorithm::Recursive, slot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FogNode, NetworkModel};

    fn fog(host: usize, capacity: f64, supported: Vec<bool>, power: f64) -> FogNode {
        FogNode {
            host_switch: host,
            capacity,
            supported_vnfs: supported,
            power_on_watts: power,
            idle_fraction: 0.9,
        }
    }

    fn flow(id: usize, source: usize, dest: usize, rate: f64, requested: Vec<bool>) -> FlowSpec {
        FlowSpec {
            id,
            source,
            dest,
            rate: vec![rate],
            requested: vec![requested],
            max_delay_ms: 1e9,
        }
    }

    #[test]
    fn fault_shortest_path_prefers_hops_at_uniform_p() {
        // 0-1-3 (two hops) versus 0-2-4-3 (three hops), uniform p.
        let mut m = NetworkModel::empty(5);
        m.add_undirected_link(0, 1, 100.0, 1.0);
        m.add_undirected_link(1, 3, 100.0, 1.0);
        m.add_undirected_link(0, 2, 100.0, 1.0);
        m.add_undirected_link(2, 4, 100.0, 1.0);
        m.add_undirected_link(4, 3, 100.0, 1.0);
        m.fault_prob = vec![vec![0.01; 5]];
        let table = shortest_path_fault(&m, 0, 0);
        assert_eq!(table[3].1, Some(1));
        let survival = (-table[3].0).exp();
        assert!((survival - 0.99f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn fault_shortest_path_detours_around_risky_node() {
        // Direct 0-1-5 through p=0.5, detour 0-2-3-4-5 through p=0.01 nodes.
        let mut m = NetworkModel::empty(6);
        m.add_undirected_link(0, 1, 100.0, 1.0);
        m.add_undirected_link(1, 5, 100.0, 1.0);
        m.add_undirected_link(0, 2, 100.0, 1.0);
        m.add_undirected_link(2, 3, 100.0, 1.0);
        m.add_undirected_link(3, 4, 100.0, 1.0);
        m.add_undirected_link(4, 5, 100.0, 1.0);
        m.fault_prob = vec![vec![0.0, 0.5, 0.01, 0.01, 0.01, 0.0]];
        // -ln(0.5) = 0.693 beats 3 * 0.01005, so the detour wins.
        let table = shortest_path_fault(&m, 0, 0);
        assert_eq!(table[5].1, Some(4));
    }

    #[test]
    fn fault_shortest_path_zero_p_gives_survival_one() {
        let mut m = NetworkModel::empty(3);
        m.add_undirected_link(0, 1, 100.0, 1.0);
        m.add_undirected_link(1, 2, 100.0, 1.0);
        let table = shortest_path_fault(&m, 0, 0);
        assert_eq!(table[2].0, 0.0);
    }

    fn four_node_service_model() -> NetworkModel {
        // Diamond 0 -> {1, 2} -> 3; fogs at 1 (expensive) and 2 (cheap).
        let mut m = NetworkModel::empty(4);
        m.add_undirected_link(0, 1, 1000.0, 10.0);
        m.add_undirected_link(1, 3, 1000.0, 10.0);
        m.add_undirected_link(0, 2, 1000.0, 10.0);
        m.add_undirected_link(2, 3, 1000.0, 10.0);
        m.fault_prob = vec![vec![0.0; 4]];
        m.max_fault = 1.0;
        m.fog_nodes[1] = Some(fog(1, 100.0, vec![true], 300.0));
        m.fog_nodes[2] = Some(fog(2, 100.0, vec![true], 100.0));
        m
    }

    #[test]
    fn next_hub_prefers_powered_on_node() {
        let m = four_node_service_model();
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let f = flow(0, 0, 3, 10.0, vec![true]);
        let state = SearchState::for_flow(
            &m,
            &catalog,
            &f,
            0,
            m.link_capacity.clone(),
            vec![0.0, 100.0, 100.0, 0.0],
        );
        // Both 1 (E=300) and 2 (E=100) are adjacent and OFF: cheaper wins.
        assert_eq!(energy_aware_next_hub(&m, &state, &catalog, &[false; 4]), Some(2));
        // Reusing an already-ON node costs nothing, even at higher rating.
        let mut on = vec![false; 4];
        on[1] = true;
        assert_eq!(energy_aware_next_hub(&m, &state, &catalog, &on), Some(1));
    }

    #[test]
    fn next_hub_none_without_adjacent_service() {
        let m = four_node_service_model();
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let f = flow(0, 2, 3, 10.0, vec![true]);
        let mut state = SearchState::for_flow(
            &m,
            &catalog,
            &f,
            0,
            m.link_capacity.clone(),
            vec![0.0, 0.0, 0.0, 0.0], // no capacity anywhere
        );
        state.current = 0;
        state.path = vec![0];
        assert_eq!(energy_aware_next_hub(&m, &state, &catalog, &[false; 4]), None);
    }

    #[test]
    fn recursive_immediate_success_when_done() {
        let m = four_node_service_model();
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let f = flow(0, 0, 3, 10.0, vec![false]);
        let mut state = SearchState::for_flow(
            &m,
            &catalog,
            &f,
            0,
            m.link_capacity.clone(),
            vec![100.0; 4],
        );
        state.current = 3;
        state.path = vec![0, 1, 3];
        state.dest = 3;
        let sol = hfes_recursive(&state, &m, &catalog, 0.1, 0, &[false; 4]).unwrap();
        assert_eq!(sol.path, vec![0, 1, 3]);
    }

    #[test]
    fn recursive_walks_to_destination_with_vacuous_fault_bound() {
        let m = four_node_service_model();
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let f = flow(0, 0, 3, 10.0, vec![false]);
        let state = SearchState::for_flow(
            &m,
            &catalog,
            &f,
            0,
            m.link_capacity.clone(),
            vec![100.0; 4],
        );
        let sol = hfes_recursive(&state, &m, &catalog, 1.0, 0, &[false; 4]).unwrap();
        assert_eq!(sol.path, vec![0, 1, 3]);
        assert!(sol.placements.is_empty());
    }

    #[test]
    fn recursive_detours_for_service() {
        let m = four_node_service_model();
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let f = flow(0, 0, 3, 10.0, vec![true]);
        let state = SearchState::for_flow(
            &m,
            &catalog,
            &f,
            0,
            m.link_capacity.clone(),
            vec![0.0, 100.0, 100.0, 0.0],
        );
        let sol = hfes_recursive(&state, &m, &catalog, 1.0, 0, &[false; 4]).unwrap();
        // Both fogs are adjacent to the source; the cheaper one wins and the
        // walk continues to the destination from there.
        assert_eq!(sol.placements, vec![(2, 0)]);
        assert_eq!(sol.path, vec![0, 2, 3]);
    }

    #[test]
    fn greedy_empty_request_takes_min_fault_path() {
        let mut m = four_node_service_model();
        m.fault_prob = vec![vec![0.0, 0.2, 0.01, 0.0]];
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let flows = vec![flow(0, 0, 3, 10.0, vec![false])];
        let out = hfes_greedy(&m, &flows, &catalog, &Assignment::empty(4));
        assert!(out.dropped.is_empty());
        let fa = &out.assignment.flows[&0];
        // 0-2-3 survives with 0.99 versus 0.8 via node 1.
        assert_eq!(fa.links, FlowAssignment::from_path(&[0, 2, 3]).links);
    }

    #[test]
    fn greedy_shares_one_fog_between_flows() {
        let mut m = four_node_service_model();
        // Make both fog nodes equally able to host both requests.
        m.fog_nodes[1] = Some(fog(1, 100.0, vec![true], 300.0));
        m.fog_nodes[2] = Some(fog(2, 100.0, vec![true], 100.0));
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let flows = vec![
            flow(0, 0, 3, 10.0, vec![true]),
            flow(1, 0, 3, 10.0, vec![true]),
        ];
        let out = hfes_greedy(&m, &flows, &catalog, &Assignment::empty(4));
        assert!(out.dropped.is_empty());
        let on_count = out.assignment.fog_on.iter().filter(|b| **b).count();
        assert_eq!(on_count, 1, "both flows should share one fog node");
        // The first routed flow picks the cheaper node 2; the second reuses it.
        for fa in out.assignment.flows.values() {
            assert_eq!(fa.vnf_placements.iter().next().unwrap().0, 2);
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let m = crate::model::abilene();
        let placed = crate::flowgen::assign_fog_placement(
            &m,
            &crate::flowgen::GeneratorParams { seed: 11, ..Default::default() },
        )
        .unwrap();
        let params = crate::flowgen::GeneratorParams { seed: 11, ..Default::default() };
        let flows = crate::flowgen::generate_demands(&placed, &params).unwrap();
        let catalog = params.catalog();
        let a = hfes_greedy(&placed, &flows, &catalog, &Assignment::empty(11));
        let b = hfes_greedy(&placed, &flows, &catalog, &Assignment::empty(11));
        assert_eq!(a, b);
    }

    #[test]
    fn impossible_fault_bound_drops_flow() {
        let mut m = four_node_service_model();
        m.fault_prob = vec![vec![0.05; 4]];
        m.max_fault = 0.0;
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let flows = vec![flow(0, 0, 3, 10.0, vec![false])];
        let out = hfes_greedy(&m, &flows, &catalog, &Assignment::empty(4));
        assert!(out.assignment.flows.is_empty());
        assert_eq!(out.dropped.len(), 1);
        assert_eq!(out.dropped[0].reason, DropReason::FaultBudget);

        let state = SearchState::for_flow(
            &m,
            &catalog,
            &flows[0],
            0,
            m.link_capacity.clone(),
            vec![100.0; 4],
        );
        assert!(hfes_recursive(&state, &m, &catalog, 0.0, 0, &[false; 4]).is_err());
    }

    #[test]
    fn pinned_flows_keep_routes() {
        let m = four_node_service_model();
        let catalog = VnfCatalog::uniform(1, 1.0, 3.0);
        let flows = vec![
            flow(0, 0, 3, 10.0, vec![false]),
            flow(1, 0, 2, 10.0, vec![false]),
        ];
        let first = hfes_greedy(&m, &flows, &catalog, &Assignment::empty(4));
        assert!(first.dropped.is_empty());
        // Re-place only flow 1; flow 0 must keep its exact route.
        let replace = BTreeSet::from([1usize]);
        let second = hfes_greedy_pinned(&m, &flows, &catalog, &first.assignment, &replace, 0);
        assert_eq!(second.assignment.flows[&0], first.assignment.flows[&0]);
    }
}
