//! Exact solver for the energy/side-effect rerouting objective.
//!
//! Because the fault constraint screens paths individually, the solver first
//! enumerates every feasible simple path per flow (delay- and fault-screened
//! during the walk), expands each path into the possible VNF placements on
//! its nodes, and then runs a depth-first branch-and-bound over the
//! per-flow candidates with shared link and Fog Node capacity. The greedy
//! heuristic's objective seeds the upper bound. Within equal objectives the
//! reported optimum is the first one in (flow id, path id, placement) order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::{self, propagation_budget, ConstraintReport};
use crate::heuristic::{hfes_greedy_pinned, solve_recursive_pinned, DropReason, DroppedFlow};
use crate::model::{Assignment, FlowAssignment, FlowSpec, NetworkModel, VnfCatalog};

/// Hard guard on per-flow candidate explosion (paths times placements).
const MAX_CANDIDATES_PER_FLOW: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintFamily {
    /// No source-destination path exists on the (residual) topology.
    Routing,
    /// Every path breaks the propagation-delay budget.
    Delay,
    /// Every path breaks the fault-probability threshold.
    Fault,
    /// Some requested VNF has no supporting node with capacity on any path.
    ServiceSupport,
    /// Individually feasible flows cannot share links and Fog Nodes.
    ResourceCoupling,
}

impl std::fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstraintFamily::Routing => "routing",
            ConstraintFamily::Delay => "delay",
            ConstraintFamily::Fault => "fault",
            ConstraintFamily::ServiceSupport => "service-support",
            ConstraintFamily::ResourceCoupling => "resource-coupling",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("exact mode supports at most {cap} switches, model has {n}")]
    CapExceeded { n: usize, cap: usize },
    #[error("infeasible: {family} constraints cannot be satisfied{}", flow.map(|f| format!(" for flow {f}")).unwrap_or_default())]
    Infeasible { family: ConstraintFamily, flow: Option<usize> },
    #[error("time limit reached before any feasible assignment was found")]
    Timeout,
    #[error(transparent)]
    Weights(#[from] feasibility::FeasibilityError),
}

/// Exact-solver knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Refuse exact mode above this switch count (hard limit 20).
    pub exact_cap_n: usize,
    /// Wall-clock limit; `None` runs to exhaustion.
    pub time_limit_ms: Option<u64>,
    /// Cap on enumerated simple paths per flow; exceeding it degrades the
    /// run to a budgeted search flagged as not proven optimal.
    pub path_budget: Option<usize>,
    /// Seed the upper bound with the greedy heuristic before searching.
    pub seed_with_heuristic: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            exact_cap_n: 12,
            time_limit_ms: None,
            path_budget: None,
            seed_with_heuristic: true,
        }
    }
}

impl SolveConfig {
    pub fn with_weights(alpha: f64) -> Self {
        Self { alpha, beta: 1.0 - alpha, ..Default::default() }
    }

    fn cap(&self) -> usize {
        self.exact_cap_n.min(feasibility::FAULT_TABLE_HARD_CAP)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// Search exhausted: the objective is proven optimal.
    Optimal,
    /// Best assignment found under a time limit or enumeration budget.
    FeasibleNotProven,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub assignment: Assignment,
    pub objective: f64,
    pub status: SolveStatus,
    pub dropped: Vec<DroppedFlow>,
    pub nodes_explored: u64,
    pub report: ConstraintReport,
}

/// Failure-recovery result: re-placed flows, drops, and the merged assignment.
#[derive(Debug, Clone)]
pub struct RecoveryOutcome {
    pub assignment: Assignment,
    pub objective: f64,
    pub status: SolveStatus,
    /// Flows that had to be re-placed (the rest stayed pinned).
    pub replaced: Vec<usize>,
    pub dropped: Vec<DroppedFlow>,
    pub report: ConstraintReport,
}

// --- candidate enumeration ---

/// A delay- and fault-feasible simple path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePath {
    pub path: Vec<usize>,
    pub path_id: u64,
    pub fault: f64,
    pub delay_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnumeration {
    pub paths: Vec<CandidatePath>,
    /// True when the path budget stopped the enumeration early.
    pub truncated: bool,
}

#[derive(Default)]
struct ScreenFlags {
    delay_pruned: bool,
    fault_pruned: bool,
    truncated: bool,
}

#[allow(clippy::too_many_arguments)]
fn path_dfs(
    model: &NetworkModel,
    slot: usize,
    dest: usize,
    rate: f64,
    link_free: &[Vec<f64>],
    budget_ms: f64,
    survival_floor: f64,
    path_budget: usize,
    visited: &mut Vec<bool>,
    path: &mut Vec<usize>,
    delay_used: f64,
    survival: f64,
    out: &mut Vec<(Vec<usize>, f64, f64)>,
    flags: &mut ScreenFlags,
) {
    let cur = *path.last().expect("path never empty");
    if cur == dest {
        out.push((path.clone(), 1.0 - survival, delay_used));
        return;
    }
    if out.len() >= path_budget {
        flags.truncated = true;
        return;
    }
    for nb in 0..model.switch_count {
        if visited[nb] || !model.has_link(cur, nb) || link_free[cur][nb] < rate {
            continue;
        }
        let d = delay_used + model.link_delay[cur][nb];
        if d > budget_ms {
            flags.delay_pruned = true;
            continue;
        }
        let s = survival * (1.0 - model.fault_prob(slot, nb));
        if s < survival_floor {
            flags.fault_pruned = true;
            continue;
        }
        visited[nb] = true;
        path.push(nb);
        path_dfs(
            model, slot, dest, rate, link_free, budget_ms, survival_floor, path_budget, visited,
            path, d, s, out, flags,
        );
        path.pop();
        visited[nb] = false;
        if flags.truncated {
            return;
        }
    }
}

fn screened_paths(
    model: &NetworkModel,
    flow: &FlowSpec,
    catalog: &VnfCatalog,
    slot: usize,
    link_free: &[Vec<f64>],
    path_budget: usize,
) -> (Vec<(Vec<usize>, f64, f64)>, ScreenFlags, f64) {
    let budget_ms = propagation_budget(flow, catalog, slot);
    let mut flags = ScreenFlags::default();
    let mut out = Vec::new();
    if budget_ms < 0.0 {
        flags.delay_pruned = true;
        return (out, flags, budget_ms);
    }
    let rate = flow.rate(slot);
    let survival_floor = 1.0 - model.max_fault;
    let mut visited = vec![false; model.switch_count];
    visited[flow.source] = true;
    let mut path = vec![flow.source];
    let survival = 1.0 - model.fault_prob(slot, flow.source);
    if survival < survival_floor {
        flags.fault_pruned = true;
        return (out, flags, budget_ms);
    }
    path_dfs(
        model,
        slot,
        flow.dest,
        rate,
        link_free,
        budget_ms,
        survival_floor,
        path_budget,
        &mut visited,
        &mut path,
        0.0,
        survival,
        &mut out,
        &mut flags,
    );
    (out, flags, budget_ms)
}

/// Enumerates every loop-free source-destination path that fits the flow's
/// delay budget and the fault threshold, tagged with its path ID and fault
/// probability. Only meaningful at exact-solver scale.
pub fn enumerate_candidate_paths(
    model: &NetworkModel,
    flow: &FlowSpec,
    catalog: &VnfCatalog,
    slot: usize,
    path_budget: Option<usize>,
) -> Result<PathEnumeration, ExactError> {
    let cap = SolveConfig::default().cap();
    if model.switch_count > cap {
        return Err(ExactError::CapExceeded { n: model.switch_count, cap });
    }
    let free: Vec<Vec<f64>> = model
        .link_capacity
        .iter()
        .map(|row| row.iter().map(|&b| model.max_utilization * b).collect())
        .collect();
    let (raw, flags, _) =
        screened_paths(model, flow, catalog, slot, &free, path_budget.unwrap_or(usize::MAX));
    let paths = raw
        .into_iter()
        .map(|(path, fault, delay_ms)| {
            let fa = FlowAssignment::from_path(&path);
            let path_id = feasibility::path_id(flow, &fa).expect("nonempty path");
            CandidatePath { path, path_id, fault, delay_ms }
        })
        .collect();
    Ok(PathEnumeration { paths, truncated: flags.truncated })
}

// --- full candidates (path x placement) ---

#[derive(Debug, Clone)]
struct Candidate {
    path: Vec<usize>,
    path_id: u64,
    links: Vec<(usize, usize)>,
    /// `(node, vnf)` per requested VNF, ordered by VNF index.
    placements: Vec<(usize, usize)>,
    /// Aggregated processing load per distinct node.
    node_loads: Vec<(usize, f64)>,
    /// Distinct nodes that must be ON.
    fog_nodes: Vec<usize>,
    /// Forwarding-table entries changed relative to the previous route.
    ns: u64,
}

struct FlowCandidates {
    flow_id: usize,
    rate: f64,
    candidates: Vec<Candidate>,
    truncated: bool,
}

fn candidates_for_flow(
    model: &NetworkModel,
    catalog: &VnfCatalog,
    flow: &FlowSpec,
    prev_links: Option<&BTreeSet<(usize, usize)>>,
    slot: usize,
    link_free: &[Vec<f64>],
    fog_free: &[f64],
    path_budget: usize,
) -> Result<FlowCandidates, ConstraintFamily> {
    let rate = flow.rate(slot);
    let (raw, flags, budget_ms) = screened_paths(model, flow, catalog, slot, link_free, path_budget);
    if raw.is_empty() {
        let reachable = {
            let mut seen = vec![false; model.switch_count];
            let mut queue = std::collections::VecDeque::from([flow.source]);
            seen[flow.source] = true;
            while let Some(u) = queue.pop_front() {
                for v in model.neighbors(u) {
                    if !seen[v] && link_free[u][v] >= rate {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            seen[flow.dest]
        };
        let family = if !reachable {
            ConstraintFamily::Routing
        } else if budget_ms < 0.0 || flags.delay_pruned && !flags.fault_pruned {
            ConstraintFamily::Delay
        } else if flags.fault_pruned {
            ConstraintFamily::Fault
        } else {
            ConstraintFamily::Delay
        };
        return Err(family);
    }

    let requested = flow.requested_vnfs(slot);
    let empty = BTreeSet::new();
    let prev = prev_links.unwrap_or(&empty);
    let mut truncated = flags.truncated;
    let mut candidates = Vec::new();
    for (path, _fault, _delay) in &raw {
        // Eligible hosts per requested VNF: path nodes with support and
        // standalone capacity for that service.
        let mut options: Vec<Vec<usize>> = Vec::with_capacity(requested.len());
        let mut feasible = true;
        for &x in &requested {
            let hosts: Vec<usize> = path
                .iter()
                .copied()
                .filter(|&node| {
                    model.fog_supports(node, x)
                        && fog_free[node] >= catalog.proc_per_unit[x] * rate
                })
                .collect();
            if hosts.is_empty() {
                feasible = false;
                break;
            }
            options.push(hosts);
        }
        if !feasible {
            continue;
        }
        let combos: usize = options.iter().map(|o| o.len()).product::<usize>().max(1);
        if candidates.len().saturating_add(combos) > MAX_CANDIDATES_PER_FLOW {
            truncated = true;
            break;
        }

        let links: Vec<(usize, usize)> = path.windows(2).map(|w| (w[0], w[1])).collect();
        let link_set: BTreeSet<(usize, usize)> = links.iter().copied().collect();
        let ns = link_set.symmetric_difference(prev).count() as u64;
        let fa = FlowAssignment::from_path(path);
        let path_id = feasibility::path_id(flow, &fa).expect("nonempty path");

        // Placements that induce the same per-node load vector are
        // interchangeable for both feasibility and objective on a fixed
        // path; only the first (lexicographically smallest) is kept.
        let mut seen_loads: BTreeSet<Vec<(usize, u64)>> = BTreeSet::new();

        // Odometer over the per-VNF host options, ascending.
        let mut idx = vec![0usize; options.len()];
        loop {
            let placements: Vec<(usize, usize)> =
                requested.iter().enumerate().map(|(k, &x)| (options[k][idx[k]], x)).collect();
            let mut loads: BTreeMap<usize, f64> = BTreeMap::new();
            for &(node, x) in &placements {
                *loads.entry(node).or_insert(0.0) += catalog.proc_per_unit[x] * rate;
            }
            let signature: Vec<(usize, u64)> =
                loads.iter().map(|(&n, &l)| (n, l.to_bits())).collect();
            let fresh = seen_loads.insert(signature);
            let node_loads: Vec<(usize, f64)> = loads.iter().map(|(&n, &l)| (n, l)).collect();
            let fog_nodes: Vec<usize> = loads.keys().copied().collect();
            if fresh {
                candidates.push(Candidate {
                    path: path.clone(),
                    path_id,
                    links: links.clone(),
                    placements,
                    node_loads,
                    fog_nodes,
                    ns,
                });
            }
            // advance odometer
            let mut k = options.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if k == usize::MAX || options.is_empty() {
                break;
            }
        }
        if requested.is_empty() {
            // The odometer above pushed exactly one placement-free candidate.
        }
    }
    if candidates.is_empty() {
        return Err(ConstraintFamily::ServiceSupport);
    }
    // Optimistic-cost exploration order: fewest changed entries, then fewest
    // Fog Nodes, then the smallest path ID. The first feasible descent is
    // then near-optimal, which lets tie-pruning cut most of the tree. Ties
    // in the objective resolve to the first candidate in this order.
    candidates.sort_by(|a, b| {
        a.ns.cmp(&b.ns)
            .then_with(|| a.fog_nodes.len().cmp(&b.fog_nodes.len()))
            .then_with(|| a.path_id.cmp(&b.path_id))
            .then_with(|| a.path.cmp(&b.path))
            .then_with(|| a.placements.cmp(&b.placements))
    });
    Ok(FlowCandidates { flow_id: flow.id, rate, candidates, truncated })
}

// --- branch and bound ---

struct Search<'a> {
    alpha: f64,
    beta: f64,
    flows: &'a [FlowCandidates],
    power: Vec<f64>,
    link_limit: Vec<Vec<f64>>,
    link_load: Vec<Vec<f64>>,
    fog_limit: Vec<f64>,
    fog_load: Vec<f64>,
    on_mask: u64,
    on_energy: f64,
    /// Total capacity of the nodes currently ON.
    on_capacity: f64,
    /// Total service load of the whole problem (candidate-independent).
    total_load: f64,
    /// Full capacity per node, for ON-capacity accounting.
    node_capacity: Vec<f64>,
    /// Fog nodes sorted by power per unit capacity, for the capacity bound.
    fill_order: Vec<(usize, f64, f64)>,
    ns_acc: u64,
    suffix_min_ns: Vec<u64>,
    choice: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
    seed_bound: f64,
    minadd_memo: HashMap<(usize, u64), f64>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl<'a> Search<'a> {
    /// Equal-objective subtrees are cut once an incumbent exists (the earlier
    /// incumbent wins ties), while the heuristic seed bound is strict so a
    /// tie with the seed still gets searched and recorded.
    fn should_prune(&self, lower_bound: f64) -> bool {
        if let Some((best, _)) = &self.best {
            if lower_bound >= *best {
                return true;
            }
        }
        lower_bound > self.seed_bound
    }

    fn min_added_energy(&mut self, k: usize) -> f64 {
        let key = (k, self.on_mask);
        if let Some(&v) = self.minadd_memo.get(&key) {
            return v;
        }
        let mut best = f64::INFINITY;
        for cand in &self.flows[k].candidates {
            let mut add = 0.0;
            for &node in &cand.fog_nodes {
                if self.on_mask & (1 << node) == 0 {
                    add += self.power[node];
                }
            }
            if add < best {
                best = add;
                if best == 0.0 {
                    break;
                }
            }
        }
        self.minadd_memo.insert(key, best);
        best
    }

    /// Lower bound on the energy still to be added: the final ON set needs
    /// enough total capacity for the (candidate-independent) total load, and
    /// a fractional min-cost fill over OFF nodes bounds that from below.
    fn capacity_fill_energy(&self) -> f64 {
        let mut deficit = self.total_load - self.on_capacity;
        if deficit <= 0.0 {
            return 0.0;
        }
        let mut added = 0.0;
        for &(node, capacity, power) in &self.fill_order {
            if self.on_mask & (1 << node) != 0 {
                continue;
            }
            if capacity >= deficit {
                added += power * (deficit / capacity);
                return added;
            }
            added += power;
            deficit -= capacity;
        }
        f64::INFINITY
    }

    fn dfs(&mut self, k: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes % 4096 == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.timed_out = true;
                    return;
                }
            }
        }
        if k == self.flows.len() {
            let obj = self.alpha * self.on_energy + self.beta * self.ns_acc as f64;
            if self.best.as_ref().map_or(true, |(v, _)| obj < *v) {
                self.best = Some((obj, self.choice.clone()));
            }
            return;
        }
        let lb0 = self.alpha * self.on_energy
            + self.beta * (self.ns_acc + self.suffix_min_ns[k]) as f64;
        if self.should_prune(lb0) {
            return;
        }
        let mut max_add: f64 = self.capacity_fill_energy();
        if self.should_prune(lb0 + self.alpha * max_add) {
            return;
        }
        for j in k..self.flows.len() {
            max_add = max_add.max(self.min_added_energy(j));
        }
        if self.should_prune(lb0 + self.alpha * max_add) {
            return;
        }

        let rate = self.flows[k].rate;
        'cand: for ci in 0..self.flows[k].candidates.len() {
            let cand = &self.flows[k].candidates[ci];
            for &(i, j) in &cand.links {
                if self.link_load[i][j] + rate > self.link_limit[i][j] {
                    continue 'cand;
                }
            }
            for &(node, load) in &cand.node_loads {
                if self.fog_load[node] + load > self.fog_limit[node] {
                    continue 'cand;
                }
            }
            // apply
            let mut link_undo = Vec::with_capacity(cand.links.len());
            for &(i, j) in &cand.links {
                link_undo.push(self.link_load[i][j]);
                self.link_load[i][j] += rate;
            }
            let mut fog_undo = Vec::with_capacity(cand.node_loads.len());
            for &(node, load) in &cand.node_loads {
                fog_undo.push(self.fog_load[node]);
                self.fog_load[node] += load;
            }
            let saved_mask = self.on_mask;
            let saved_energy = self.on_energy;
            let saved_capacity = self.on_capacity;
            for &node in &self.flows[k].candidates[ci].fog_nodes {
                if self.on_mask & (1 << node) == 0 {
                    self.on_mask |= 1 << node;
                    self.on_energy += self.power[node];
                    self.on_capacity += self.node_capacity[node];
                }
            }
            let saved_ns = self.ns_acc;
            self.ns_acc += self.flows[k].candidates[ci].ns;
            self.choice.push(ci);

            self.dfs(k + 1);

            // undo
            self.choice.pop();
            self.ns_acc = saved_ns;
            self.on_capacity = saved_capacity;
            self.on_energy = saved_energy;
            self.on_mask = saved_mask;
            let cand = &self.flows[k].candidates[ci];
            for (pos, &(node, _)) in cand.node_loads.iter().enumerate() {
                self.fog_load[node] = fog_undo[pos];
            }
            for (pos, &(i, j)) in cand.links.iter().enumerate() {
                self.link_load[i][j] = link_undo[pos];
            }
            if self.timed_out {
                return;
            }
        }
    }
}

// --- the solver core ---

struct CoreResult {
    assignment: Assignment,
    dropped: Vec<DroppedFlow>,
    status: SolveStatus,
    nodes: u64,
}

#[allow(clippy::too_many_arguments)]
fn solve_core(
    model: &NetworkModel,
    catalog: &VnfCatalog,
    place: &[&FlowSpec],
    pinned: &[(&FlowSpec, &FlowAssignment)],
    prev: &Assignment,
    config: &SolveConfig,
    slot: usize,
    allow_drops: bool,
) -> Result<CoreResult, ExactError> {
    feasibility::check_weights(config.alpha, config.beta)?;
    let n = model.switch_count;
    if n > config.cap() {
        return Err(ExactError::CapExceeded { n, cap: config.cap() });
    }

    // Residual resources after the pinned flows are committed.
    let mut link_limit: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| model.max_utilization * model.link_capacity[i][j]).collect())
        .collect();
    let mut fog_limit: Vec<f64> = (0..n).map(|i| model.fog_capacity(i)).collect();
    let mut base_mask = 0u64;
    let mut base_energy = 0.0;
    let power: Vec<f64> =
        (0..n).map(|i| model.fog(i).map(|f| f.power_on_watts).unwrap_or(0.0)).collect();
    for (flow, fa) in pinned {
        let rate = flow.rate(slot);
        for &(i, j) in &fa.links {
            link_limit[i][j] -= rate;
        }
        for &(node, x) in &fa.vnf_placements {
            fog_limit[node] -= catalog.proc_per_unit[x] * rate;
            if base_mask & (1 << node) == 0 {
                base_mask |= 1 << node;
                base_energy += power[node];
            }
        }
    }

    // Candidate generation, dropping infeasible flows when allowed.
    let mut ordered: Vec<&FlowSpec> = place.to_vec();
    ordered.sort_by_key(|f| f.id);
    let mut dropped: Vec<DroppedFlow> = Vec::new();
    let mut flow_cands: Vec<FlowCandidates> = Vec::new();
    let mut truncated_any = false;
    let budget = config.path_budget.unwrap_or(usize::MAX);
    for flow in &ordered {
        let prev_links = prev.flows.get(&flow.id).map(|fa| &fa.links);
        match candidates_for_flow(
            model, catalog, flow, prev_links, slot, &link_limit, &fog_limit, budget,
        ) {
            Ok(fc) => {
                truncated_any |= fc.truncated;
                flow_cands.push(fc);
            }
            Err(family) => {
                if allow_drops {
                    dropped.push(DroppedFlow { flow: flow.id, reason: family_to_reason(family) });
                } else {
                    return Err(ExactError::Infeasible { family, flow: Some(flow.id) });
                }
            }
        }
    }

    // Branch on the most constrained flows first.
    flow_cands.sort_by(|a, b| {
        a.candidates.len().cmp(&b.candidates.len()).then(a.flow_id.cmp(&b.flow_id))
    });

    let by_id: BTreeMap<usize, &FlowSpec> = place.iter().map(|f| (f.id, *f)).collect();
    let mut nodes_total = 0u64;
    loop {
        // Heuristic seed for the upper bound: greedy first, recursive when the
        // greedy drops a flow the search must place.
        let mut seed_bound = f64::INFINITY;
        if config.seed_with_heuristic && !flow_cands.is_empty() {
            let mut subset: Vec<FlowSpec> = pinned.iter().map(|(f, _)| (*f).clone()).collect();
            subset.extend(flow_cands.iter().map(|fc| by_id[&fc.flow_id].clone()));
            let replace: BTreeSet<usize> = flow_cands.iter().map(|fc| fc.flow_id).collect();
            let attempts = [
                hfes_greedy_pinned(model, &subset, catalog, prev, &replace, slot),
                solve_recursive_pinned(model, &subset, catalog, prev, &replace, slot),
            ];
            for seed in attempts {
                if !seed.dropped.iter().all(|d| !replace.contains(&d.flow)) {
                    continue;
                }
                let mut obj = config.alpha * feasibility::energy(model, &seed.assignment);
                for fc in &flow_cands {
                    if let Some(fa) = seed.assignment.flows.get(&fc.flow_id) {
                        let empty = BTreeSet::new();
                        let prev_links =
                            prev.flows.get(&fc.flow_id).map(|p| &p.links).unwrap_or(&empty);
                        obj += config.beta
                            * fa.links.symmetric_difference(prev_links).count() as f64;
                    }
                }
                seed_bound = seed_bound.min(obj);
            }
        }

        let suffix_min_ns = {
            let mut acc = vec![0u64; flow_cands.len() + 1];
            for k in (0..flow_cands.len()).rev() {
                let min_ns =
                    flow_cands[k].candidates.iter().map(|c| c.ns).min().unwrap_or(0);
                acc[k] = acc[k + 1] + min_ns;
            }
            acc
        };

        let node_capacity: Vec<f64> = (0..n).map(|i| model.fog_capacity(i)).collect();
        let mut fill_order: Vec<(usize, f64, f64)> = (0..n)
            .filter(|&i| node_capacity[i] > 0.0)
            .map(|i| (i, node_capacity[i], power[i]))
            .collect();
        fill_order.sort_by(|a, b| (a.2 / a.1).total_cmp(&(b.2 / b.1)).then(a.0.cmp(&b.0)));
        let base_capacity: f64 =
            (0..n).filter(|&i| base_mask & (1 << i) != 0).map(|i| node_capacity[i]).sum();
        let base_load: f64 = pinned
            .iter()
            .map(|(flow, fa)| {
                fa.vnf_placements
                    .iter()
                    .map(|&(_, x)| catalog.proc_per_unit[x] * flow.rate(slot))
                    .sum::<f64>()
            })
            .sum();
        let place_load: f64 = flow_cands
            .iter()
            .map(|fc| {
                by_id[&fc.flow_id]
                    .requested_vnfs(slot)
                    .iter()
                    .map(|&x| catalog.proc_per_unit[x] * fc.rate)
                    .sum::<f64>()
            })
            .sum();

        let mut search = Search {
            alpha: config.alpha,
            beta: config.beta,
            flows: &flow_cands,
            power: power.clone(),
            link_limit: link_limit.clone(),
            link_load: vec![vec![0.0; n]; n],
            fog_limit: fog_limit.clone(),
            fog_load: vec![0.0; n],
            on_mask: base_mask,
            on_energy: base_energy,
            on_capacity: base_capacity,
            total_load: base_load + place_load,
            node_capacity,
            fill_order,
            ns_acc: 0,
            suffix_min_ns,
            choice: Vec::with_capacity(flow_cands.len()),
            best: None,
            seed_bound,
            minadd_memo: HashMap::new(),
            nodes: 0,
            deadline: config
                .time_limit_ms
                .map(|ms| Instant::now() + std::time::Duration::from_millis(ms)),
            timed_out: false,
        };
        search.dfs(0);
        nodes_total += search.nodes;

        match search.best {
            Some((_, choice)) => {
                let mut assignment = Assignment::empty(n);
                for (flow, fa) in pinned {
                    assignment.flows.insert(flow.id, (*fa).clone());
                }
                for (k, fc) in flow_cands.iter().enumerate() {
                    let cand = &fc.candidates[choice[k]];
                    let mut fa = FlowAssignment::from_path(&cand.path);
                    fa.vnf_placements.extend(cand.placements.iter().copied());
                    assignment.flows.insert(fc.flow_id, fa);
                }
                assignment.set_fog_on_from_usage(n);
                let status = if search.timed_out || truncated_any {
                    SolveStatus::FeasibleNotProven
                } else {
                    SolveStatus::Optimal
                };
                return Ok(CoreResult { assignment, dropped, status, nodes: nodes_total });
            }
            None if search.timed_out => return Err(ExactError::Timeout),
            None => {
                if flow_cands.is_empty() {
                    // Nothing left to place.
                    let mut assignment = Assignment::empty(n);
                    for (flow, fa) in pinned {
                        assignment.flows.insert(flow.id, (*fa).clone());
                    }
                    assignment.set_fog_on_from_usage(n);
                    return Ok(CoreResult {
                        assignment,
                        dropped,
                        status: SolveStatus::Optimal,
                        nodes: nodes_total,
                    });
                }
                if !allow_drops {
                    return Err(ExactError::Infeasible {
                        family: ConstraintFamily::ResourceCoupling,
                        flow: None,
                    });
                }
                // Shed the most constrained flow and retry: fewest candidates,
                // then highest rate, then id.
                let victim = flow_cands
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        a.candidates
                            .len()
                            .cmp(&b.candidates.len())
                            .then(b.rate.total_cmp(&a.rate))
                            .then(a.flow_id.cmp(&b.flow_id))
                    })
                    .map(|(i, _)| i)
                    .expect("nonempty");
                let removed = flow_cands.remove(victim);
                dropped.push(DroppedFlow {
                    flow: removed.flow_id,
                    reason: DropReason::Exhausted,
                });
            }
        }
    }
}

fn family_to_reason(family: ConstraintFamily) -> DropReason {
    match family {
        ConstraintFamily::Routing => DropReason::Unreachable,
        ConstraintFamily::Delay => DropReason::DelayBudget,
        ConstraintFamily::Fault => DropReason::FaultBudget,
        ConstraintFamily::ServiceSupport => DropReason::NoServiceCapacity,
        ConstraintFamily::ResourceCoupling => DropReason::Exhausted,
    }
}

/// Minimizes `alpha * E + beta * NS` over the joint per-flow candidate space.
/// Errors out (naming the failing constraint family) if any flow cannot be
/// placed; use [`solve_exact_with_drops`] for best-effort placement.
pub fn solve_exact(
    model: &NetworkModel,
    flows: &[FlowSpec],
    prev: &Assignment,
    catalog: &VnfCatalog,
    config: &SolveConfig,
    slot: usize,
) -> Result<SolveOutcome, ExactError> {
    let place: Vec<&FlowSpec> = flows.iter().collect();
    let core = solve_core(model, catalog, &place, &[], prev, config, slot, false)?;
    finish(model, flows, prev, catalog, config, slot, core)
}

/// Best-effort exact solve: flows that cannot be placed are dropped and the
/// remainder is optimized.
pub fn solve_exact_with_drops(
    model: &NetworkModel,
    flows: &[FlowSpec],
    prev: &Assignment,
    catalog: &VnfCatalog,
    config: &SolveConfig,
    slot: usize,
) -> Result<SolveOutcome, ExactError> {
    let place: Vec<&FlowSpec> = flows.iter().collect();
    let core = solve_core(model, catalog, &place, &[], prev, config, slot, true)?;
    finish(model, flows, prev, catalog, config, slot, core)
}

fn finish(
    model: &NetworkModel,
    flows: &[FlowSpec],
    prev: &Assignment,
    catalog: &VnfCatalog,
    config: &SolveConfig,
    slot: usize,
    core: CoreResult,
) -> Result<SolveOutcome, ExactError> {
    let report = feasibility::evaluate(
        model,
        flows,
        catalog,
        prev,
        &core.assignment,
        config.alpha,
        config.beta,
        slot,
    )?;
    Ok(SolveOutcome {
        objective: report.objective_value,
        assignment: core.assignment,
        status: core.status,
        dropped: core.dropped,
        nodes_explored: core.nodes,
        report,
    })
}

/// Flows whose previous route or placement touches a failed switch, plus
/// flows with no previous route at all.
pub fn affected_flows(
    flows: &[FlowSpec],
    prev: &Assignment,
    failed: &BTreeSet<usize>,
) -> BTreeSet<usize> {
    flows
        .iter()
        .filter(|f| match prev.flows.get(&f.id) {
            Some(fa) => failed.iter().any(|&s| fa.uses_switch(s)),
            None => true,
        })
        .map(|f| f.id)
        .collect()
}

/// Re-places exactly the flows that passed through the failed switches:
/// everything else keeps its previous route (contributing zero side-effect)
/// and the affected flows are re-solved on the residual topology. Flows that
/// no longer fit are reported dropped.
pub fn recover_from_failure(
    model: &NetworkModel,
    flows: &[FlowSpec],
    prev: &Assignment,
    failed: &BTreeSet<usize>,
    catalog: &VnfCatalog,
    config: &SolveConfig,
    slot: usize,
) -> Result<RecoveryOutcome, ExactError> {
    let residual = model.remove_switches(failed);
    let affected = affected_flows(flows, prev, failed);
    let mut place = Vec::new();
    let mut pinned = Vec::new();
    for flow in flows {
        if affected.contains(&flow.id) {
            place.push(flow);
        } else {
            pinned.push((flow, &prev.flows[&flow.id]));
        }
    }
    let core = solve_core(&residual, catalog, &place, &pinned, prev, config, slot, true)?;
    let report = feasibility::evaluate(
        &residual,
        flows,
        catalog,
        prev,
        &core.assignment,
        config.alpha,
        config.beta,
        slot,
    )?;
    Ok(RecoveryOutcome {
        objective: report.objective_value,
        assignment: core.assignment,
        status: core.status,
        replaced: affected.into_iter().collect(),
        dropped: core.dropped,
        report,
    })
}
