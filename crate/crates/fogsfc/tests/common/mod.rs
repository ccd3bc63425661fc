//! Shared helpers for the integration suites: a random-instance generator,
//! an independent brute-force oracle, and small statistics utilities.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fogsfc::feasibility::{self};
use fogsfc::model::{Assignment, FlowAssignment, FlowSpec, FogNode, NetworkModel, VnfCatalog};

pub struct RandomInstance {
    pub model: NetworkModel,
    pub catalog: VnfCatalog,
    pub flows: Vec<FlowSpec>,
}

/// Sparse random connected network (spanning tree plus a few extra links)
/// with random Fog Nodes and a small flow population. Sparseness keeps the
/// exhaustive oracle's combination count tractable.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n_range: (usize, usize),
    max_flows: usize,
    max_vnfs: usize,
    extra_links: usize,
) -> RandomInstance {
    let n = rng.random_range(n_range.0..=n_range.1);
    let mut model = NetworkModel::empty(n);
    for i in 1..n {
        let parent = rng.random_range(0..i);
        let cap = rng.random_range(300.0..1500.0);
        let delay = rng.random_range(10.0..60.0);
        model.add_undirected_link(parent, i, cap, delay);
    }
    for _ in 0..extra_links {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b && !model.has_link(a, b) {
            let cap = rng.random_range(300.0..1500.0);
            let delay = rng.random_range(10.0..60.0);
            model.add_undirected_link(a, b, cap, delay);
        }
    }
    model.fault_prob = vec![(0..n).map(|_| rng.random_range(0.0..0.03)).collect()];
    model.max_fault = 0.15;
    model.max_utilization = 1.0;

    let x = rng.random_range(1..=max_vnfs);
    let catalog = VnfCatalog {
        vnf_count: x,
        proc_per_unit: (0..x).map(|_| rng.random_range(0.5..2.0)).collect(),
        proc_time_ms: vec![3.0; x],
    };

    for i in 0..n {
        if rng.random_range(0.0..1.0) < 0.6 {
            let supported: Vec<bool> = (0..x).map(|_| rng.random_range(0.0..1.0) < 0.6).collect();
            model.fog_nodes[i] = Some(FogNode {
                host_switch: i,
                capacity: rng.random_range(50.0..400.0),
                supported_vnfs: supported,
                power_on_watts: rng.random_range(50.0..300.0),
                idle_fraction: 0.9,
            });
        }
    }

    let f = rng.random_range(1..=max_flows);
    let mut flows = Vec::with_capacity(f);
    for id in 0..f {
        let source = rng.random_range(0..n);
        let mut dest = rng.random_range(0..n);
        while dest == source {
            dest = rng.random_range(0..n);
        }
        let mut requested = vec![false; x];
        let want = rng.random_range(0..=2.min(x));
        let mut picked = 0;
        while picked < want {
            let v = rng.random_range(0..x);
            if !requested[v] {
                requested[v] = true;
                picked += 1;
            }
        }
        let rate = rng.random_range(5.0..40.0);
        let service: f64 = requested
            .iter()
            .enumerate()
            .filter(|(_, r)| **r)
            .map(|(v, _)| catalog.proc_time_ms[v] * rate)
            .sum();
        flows.push(FlowSpec {
            id,
            source,
            dest,
            rate: vec![rate],
            requested: vec![requested],
            max_delay_ms: service + rng.random_range(150.0..400.0),
        });
    }
    model.validate().expect("generated model is valid");
    RandomInstance { model, catalog, flows }
}

/// Every loop-free path between two switches (plain DFS, no screening).
pub fn all_simple_paths(model: &NetworkModel, source: usize, dest: usize) -> Vec<Vec<usize>> {
    fn dfs(
        model: &NetworkModel,
        dest: usize,
        visited: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let cur = *path.last().unwrap();
        if cur == dest {
            out.push(path.clone());
            return;
        }
        for nb in 0..model.switch_count {
            if !visited[nb] && model.has_link(cur, nb) {
                visited[nb] = true;
                path.push(nb);
                dfs(model, dest, visited, path, out);
                path.pop();
                visited[nb] = false;
            }
        }
    }
    let mut visited = vec![false; model.switch_count];
    visited[source] = true;
    let mut out = Vec::new();
    dfs(model, dest, &mut visited, &mut vec![source], &mut out);
    out
}

/// Every way to host the flow's requested VNFs on supporting nodes of the
/// path (no capacity screening; the evaluator rejects overloads).
fn all_placements(
    model: &NetworkModel,
    flow: &FlowSpec,
    path: &[usize],
    slot: usize,
) -> Vec<Vec<(usize, usize)>> {
    let requested = flow.requested_vnfs(slot);
    let mut options: Vec<Vec<usize>> = Vec::new();
    for &x in &requested {
        let hosts: Vec<usize> =
            path.iter().copied().filter(|&node| model.fog_supports(node, x)).collect();
        if hosts.is_empty() {
            return Vec::new();
        }
        options.push(hosts);
    }
    let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for (k, hosts) in options.iter().enumerate() {
        let mut next = Vec::with_capacity(combos.len() * hosts.len());
        for combo in &combos {
            for &host in hosts {
                let mut c = combo.clone();
                c.push((host, requested[k]));
                next.push(c);
            }
        }
        combos = next;
    }
    combos
}

pub enum OracleResult {
    /// Minimum objective over every feasible combination, with a witness.
    Feasible(f64, Assignment),
    Infeasible,
    /// Combination count exceeded the cap; instance should be skipped.
    TooLarge,
}

/// Exhaustive oracle: enumerates every per-flow (path, placement) choice,
/// scores each full combination with the feasibility evaluator, and returns
/// the minimum objective. Independent of the solver's search path.
pub fn brute_force_best(
    model: &NetworkModel,
    flows: &[FlowSpec],
    prev: &Assignment,
    catalog: &VnfCatalog,
    alpha: f64,
    beta: f64,
    slot: usize,
    combo_cap: usize,
) -> OracleResult {
    let mut per_flow: Vec<Vec<FlowAssignment>> = Vec::with_capacity(flows.len());
    for flow in flows {
        let mut choices = Vec::new();
        for path in all_simple_paths(model, flow.source, flow.dest) {
            for placement in all_placements(model, flow, &path, slot) {
                let mut fa = FlowAssignment::from_path(&path);
                fa.vnf_placements.extend(placement);
                choices.push(fa);
            }
        }
        if choices.is_empty() {
            return OracleResult::Infeasible;
        }
        per_flow.push(choices);
    }
    let total: usize = per_flow.iter().map(|c| c.len()).product();
    if total > combo_cap {
        return OracleResult::TooLarge;
    }

    let mut best: Option<(f64, Assignment)> = None;
    let mut any_feasible = false;
    let mut idx = vec![0usize; per_flow.len()];
    loop {
        let mut assignment = Assignment::empty(model.switch_count);
        for (k, flow) in flows.iter().enumerate() {
            assignment.flows.insert(flow.id, per_flow[k][idx[k]].clone());
        }
        assignment.set_fog_on_from_usage(model.switch_count);
        let report =
            feasibility::evaluate(model, flows, catalog, prev, &assignment, alpha, beta, slot)
                .expect("weights are valid");
        if report.pass() {
            any_feasible = true;
            if best.as_ref().map_or(true, |(v, _)| report.objective_value < *v) {
                best = Some((report.objective_value, assignment));
            }
        }
        // advance
        let mut k = per_flow.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_flow[k].len() {
                break;
            }
            idx[k] = 0;
            if k == 0 {
                k = usize::MAX;
                break;
            }
        }
        if k == usize::MAX {
            break;
        }
    }
    if !any_feasible {
        return OracleResult::Infeasible;
    }
    let (value, witness) = best.unwrap();
    OracleResult::Feasible(value, witness)
}

/// One-sided paired t statistic for H1: mean(diff) > 0.
pub fn paired_t(diffs: &[f64]) -> f64 {
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return if mean > 0.0 { f64::INFINITY } else { 0.0 };
    }
    mean / (var / n).sqrt()
}

/// Coefficient of determination of the least-squares line through (x, y).
pub fn linear_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 1.0;
    }
    (sxy * sxy) / (sxx * syy)
}

/// Set of switches a flow's assignment touches.
pub fn used_switches(fa: &FlowAssignment) -> BTreeSet<usize> {
    let mut s: BTreeSet<usize> = fa.links.iter().flat_map(|&(i, j)| [i, j]).collect();
    s.extend(fa.vnf_placements.iter().map(|&(i, _)| i));
    s
}
