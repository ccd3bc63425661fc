//! Scenario runner: builds seeded instances, drives the per-slot event loop
//! (failures, arrivals, periodic reconfiguration), and persists results.
//!
//! Slots where a failure fires run in recovery mode: unaffected flows stay
//! pinned to their routes and only the flows touching failed switches (plus
//! any new arrivals) are re-placed. Every other slot runs a full periodic
//! reconfiguration against the previous slot's assignment.

use std::collections::BTreeSet;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{
    affected_flows, recover_from_failure, solve_exact_with_drops, ExactError, SolveConfig,
    SolveStatus,
};
use crate::feasibility::{self, MetricsReport};
use crate::flowgen::{assign_fog_placement, generate_demands, GenError, GeneratorParams};
use crate::heuristic::{
    hfes_greedy_pinned, hfes_greedy_slot, solve_recursive, solve_recursive_pinned, DroppedFlow,
};
use crate::model::{abilene, Assignment, FlowSpec, ModelError, NetworkModel, VnfCatalog};

const FAULT_STREAM_SALT: u64 = 0x7061_7468;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario id {0:?} (expected S1..S9)")]
    UnknownScenario(String),
    #[error("invalid scenario config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Feasibility(#[from] feasibility::FeasibilityError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Exact,
    Recursive,
    Greedy,
}

impl SolverChoice {
    pub fn label(&self) -> &'static str {
        match self {
            SolverChoice::Exact => "exact",
            SolverChoice::Recursive => "recursive",
            SolverChoice::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureEvent {
    pub slot: usize,
    pub switches: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairEvent {
    pub slot: usize,
    pub switches: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalEvent {
    pub slot: usize,
    pub flow: FlowSpec,
}

/// A runnable experiment: generator parameters, objective weights, solver,
/// horizon, and the injected event schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: String,
    pub params: GeneratorParams,
    pub alpha: f64,
    pub beta: f64,
    pub solver: SolverChoice,
    pub slots: usize,
    pub seed: u64,
    #[serde(default)]
    pub failures: Vec<FailureEvent>,
    #[serde(default)]
    pub arrivals: Vec<ArrivalEvent>,
    #[serde(default)]
    pub repairs: Vec<RepairEvent>,
    /// When set, per-slot switch fault probabilities are redrawn uniformly
    /// from this range instead of keeping the topology's values.
    #[serde(default)]
    pub fault_range: Option<(f64, f64)>,
    /// Exact-solver knobs.
    #[serde(default = "default_cap")]
    pub exact_cap_n: usize,
    #[serde(default)]
    pub time_limit_ms: Option<u64>,
    #[serde(default)]
    pub path_budget: Option<usize>,
}

fn default_cap() -> usize {
    12
}

impl ScenarioConfig {
    /// Built-in scenario table: S1-S3 sweep the flow size, S4-S6 the Fog Node
    /// ratio, S7-S9 the requested-VNF count. Everything else is shared.
    pub fn preset(id: &str, seed: u64) -> Result<Self, ScenarioError> {
        let mut params = GeneratorParams {
            delay_allowance_hops: 10.0,
            ..Default::default()
        };
        match id {
            "S1" => params.rate_fraction = 0.01,
            "S2" => params.rate_fraction = 0.05,
            "S3" => params.rate_fraction = 0.1,
            "S4" => params.fog_ratio = 0.5,
            "S5" => params.fog_ratio = 0.7,
            "S6" => params.fog_ratio = 1.0,
            "S7" => params.mean_requested = 2.0,
            "S8" => params.mean_requested = 4.0,
            "S9" => params.mean_requested = 6.0,
            other => return Err(ScenarioError::UnknownScenario(other.to_string())),
        }
        Ok(Self {
            id: id.to_string(),
            params,
            alpha: 0.5,
            beta: 0.5,
            solver: SolverChoice::Greedy,
            slots: 1,
            seed,
            failures: Vec::new(),
            arrivals: Vec::new(),
            repairs: Vec::new(),
            fault_range: None,
            exact_cap_n: 12,
            time_limit_ms: None,
            path_budget: None,
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        feasibility::check_weights(self.alpha, self.beta)
            .map_err(|_| ScenarioError::BadConfig("alpha + beta must equal 1".into()))?;
        if self.slots == 0 {
            return Err(ScenarioError::BadConfig("slots must be >= 1".into()));
        }
        for ev in &self.failures {
            if ev.slot >= self.slots {
                return Err(ScenarioError::BadConfig(format!(
                    "failure scheduled at slot {} beyond horizon {}",
                    ev.slot, self.slots
                )));
            }
        }
        for ev in &self.arrivals {
            if ev.slot >= self.slots {
                return Err(ScenarioError::BadConfig(format!(
                    "arrival scheduled at slot {} beyond horizon {}",
                    ev.slot, self.slots
                )));
            }
        }
        Ok(())
    }

    pub fn solve_config(&self, alpha: f64) -> SolveConfig {
        SolveConfig {
            alpha,
            beta: 1.0 - alpha,
            exact_cap_n: self.exact_cap_n,
            time_limit_ms: self.time_limit_ms,
            path_budget: self.path_budget,
            seed_with_heuristic: true,
        }
    }

    /// Stable hash of the serialized config, recorded for provenance.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a64(json.as_bytes()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// A fully built instance: fog-placed model, catalog, and demand set.
#[derive(Debug, Clone)]
pub struct Instance {
    pub model: NetworkModel,
    pub catalog: VnfCatalog,
    pub flows: Vec<FlowSpec>,
}

/// Builds the seeded instance for a config; `base` defaults to Abilene.
pub fn build_instance(
    cfg: &ScenarioConfig,
    base: Option<&NetworkModel>,
) -> Result<Instance, ScenarioError> {
    cfg.validate()?;
    let base_model = base.cloned().unwrap_or_else(abilene);
    let mut params = cfg.params.clone();
    params.seed = cfg.seed;
    params.slots = cfg.slots;
    let mut model = assign_fog_placement(&base_model, &params)?;
    if let Some((lo, hi)) = cfg.fault_range {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(ScenarioError::BadConfig(format!("bad fault range ({lo}, {hi})")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ FAULT_STREAM_SALT);
        model.fault_prob = (0..cfg.slots)
            .map(|_| (0..model.switch_count).map(|_| rng.random_range(lo..=hi)).collect())
            .collect();
    }
    let flows = generate_demands(&model, &params)?;
    let mut ids: BTreeSet<usize> = flows.iter().map(|f| f.id).collect();
    for ev in &cfg.arrivals {
        if !ids.insert(ev.flow.id) {
            return Err(ScenarioError::BadConfig(format!(
                "arrival flow id {} collides with an existing flow",
                ev.flow.id
            )));
        }
        ev.flow.validate(model.switch_count)?;
    }
    Ok(Instance { model, catalog: params.catalog(), flows })
}

/// One slot of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub seed: u64,
    pub solver: String,
    pub slot: usize,
    pub metrics: MetricsReport,
    pub status: String,
    pub dropped: Vec<usize>,
    /// Measured solve time. Excluded from serialized output unless timing is
    /// explicitly requested, so replays stay byte-identical.
    #[serde(skip)]
    pub wall_ms: u64,
    pub config_hash: String,
    pub version: String,
}

struct SlotSolve {
    assignment: Assignment,
    dropped: Vec<DroppedFlow>,
    status: String,
}

fn status_label(base: &str, dropped: &[DroppedFlow]) -> String {
    if dropped.is_empty() {
        base.to_string()
    } else {
        format!("{base}-partial")
    }
}

/// Runs the scenario's event loop and returns one record per slot. The final
/// assignment is also returned for callers that keep evolving the state.
pub fn run_scenario_with_state(
    cfg: &ScenarioConfig,
    base: Option<&NetworkModel>,
) -> Result<(Vec<RunRecord>, Assignment), ScenarioError> {
    let instance = build_instance(cfg, base)?;
    let n = instance.model.switch_count;
    let hash = cfg.config_hash();
    let version = env!("CARGO_PKG_VERSION").to_string();

    let mut failed: BTreeSet<usize> = BTreeSet::new();
    let mut active: Vec<FlowSpec> = instance.flows.clone();
    let mut prev = Assignment::empty(n);
    let mut records = Vec::with_capacity(cfg.slots);

    for slot in 0..cfg.slots {
        for ev in cfg.repairs.iter().filter(|e| e.slot == slot) {
            for s in &ev.switches {
                failed.remove(s);
            }
        }
        let mut failed_now: BTreeSet<usize> = BTreeSet::new();
        for ev in cfg.failures.iter().filter(|e| e.slot == slot) {
            failed_now.extend(ev.switches.iter().copied());
        }
        failed.extend(failed_now.iter().copied());
        let model = instance.model.remove_switches(&failed);
        for ev in cfg.arrivals.iter().filter(|e| e.slot == slot) {
            active.push(ev.flow.clone());
        }

        let start = std::time::Instant::now();
        // A solver timeout without any feasible assignment marks the slot
        // failed (every flow dropped) and the run continues.
        let timeout_slot = |active: &[FlowSpec]| SlotSolve {
            assignment: Assignment::empty(n),
            dropped: active
                .iter()
                .map(|f| DroppedFlow { flow: f.id, reason: crate::heuristic::DropReason::Exhausted })
                .collect(),
            status: "timeout".to_string(),
        };
        let solve = if !failed_now.is_empty() {
            // Failure recovery: pin unaffected flows, re-place the rest.
            let affected = affected_flows(&active, &prev, &failed_now);
            match cfg.solver {
                SolverChoice::Exact => {
                    match recover_from_failure(
                        &model,
                        &active,
                        &prev,
                        &failed_now,
                        &instance.catalog,
                        &cfg.solve_config(cfg.alpha),
                        slot,
                    ) {
                        Ok(out) => {
                            let base = match out.status {
                                SolveStatus::Optimal => "optimal",
                                SolveStatus::FeasibleNotProven => "feasible",
                            };
                            SlotSolve {
                                status: status_label(base, &out.dropped),
                                assignment: out.assignment,
                                dropped: out.dropped,
                            }
                        }
                        Err(ExactError::Timeout) => timeout_slot(&active),
                        Err(e) => return Err(e.into()),
                    }
                }
                SolverChoice::Greedy => {
                    let out = hfes_greedy_pinned(
                        &model,
                        &active,
                        &instance.catalog,
                        &prev,
                        &affected,
                        slot,
                    );
                    SlotSolve {
                        status: status_label("heuristic", &out.dropped),
                        assignment: out.assignment,
                        dropped: out.dropped,
                    }
                }
                SolverChoice::Recursive => {
                    let out = solve_recursive_pinned(
                        &model,
                        &active,
                        &instance.catalog,
                        &prev,
                        &affected,
                        slot,
                    );
                    SlotSolve {
                        status: status_label("heuristic", &out.dropped),
                        assignment: out.assignment,
                        dropped: out.dropped,
                    }
                }
            }
        } else {
            // Periodic reconfiguration over every active flow.
            match cfg.solver {
                SolverChoice::Exact => {
                    match solve_exact_with_drops(
                        &model,
                        &active,
                        &prev,
                        &instance.catalog,
                        &cfg.solve_config(cfg.alpha),
                        slot,
                    ) {
                        Ok(out) => {
                            let base = match out.status {
                                SolveStatus::Optimal => "optimal",
                                SolveStatus::FeasibleNotProven => "feasible",
                            };
                            SlotSolve {
                                status: status_label(base, &out.dropped),
                                assignment: out.assignment,
                                dropped: out.dropped,
                            }
                        }
                        Err(ExactError::Timeout) => timeout_slot(&active),
                        Err(e) => return Err(e.into()),
                    }
                }
                SolverChoice::Greedy => {
                    let out = hfes_greedy_slot(&model, &active, &instance.catalog, &prev, slot);
                    SlotSolve {
                        status: status_label("heuristic", &out.dropped),
                        assignment: out.assignment,
                        dropped: out.dropped,
                    }
                }
                SolverChoice::Recursive => {
                    let out = solve_recursive(&model, &active, &instance.catalog, &prev, slot);
                    SlotSolve {
                        status: status_label("heuristic", &out.dropped),
                        assignment: out.assignment,
                        dropped: out.dropped,
                    }
                }
            }
        };
        let wall_ms = start.elapsed().as_millis() as u64;

        let metrics =
            feasibility::metrics(&model, &active, &instance.catalog, &prev, &solve.assignment, slot);
        records.push(RunRecord {
            scenario: cfg.id.clone(),
            seed: cfg.seed,
            solver: cfg.solver.label().to_string(),
            slot,
            metrics,
            status: solve.status,
            dropped: solve.dropped.iter().map(|d| d.flow).collect(),
            wall_ms,
            config_hash: hash.clone(),
            version: version.clone(),
        });
        prev = solve.assignment;
    }
    Ok((records, prev))
}

/// Runs the scenario's event loop and returns one record per slot.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    base: Option<&NetworkModel>,
) -> Result<Vec<RunRecord>, ScenarioError> {
    run_scenario_with_state(cfg, base).map(|(records, _)| records)
}

/// Runs a batch of configs in a work pool; output order is deterministic.
pub fn run_many(
    cfgs: &[ScenarioConfig],
    base: Option<&NetworkModel>,
) -> Result<Vec<RunRecord>, ScenarioError> {
    let mut results: Vec<Vec<RunRecord>> = cfgs
        .par_iter()
        .map(|cfg| run_scenario(cfg, base))
        .collect::<Result<Vec<_>, _>>()?;
    let mut flat: Vec<RunRecord> = results.drain(..).flatten().collect();
    flat.sort_by(|a, b| {
        (&a.scenario, a.seed, &a.solver, a.slot).cmp(&(&b.scenario, b.seed, &b.solver, b.slot))
    });
    Ok(flat)
}

// --- alpha sweep ---

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub energy_j: f64,
    pub side_effect: u64,
    pub dropped: usize,
}

/// Runs the exact solver over an alpha grid on one fixed instance. Slots
/// before the last run at the config's own alpha to build a common previous
/// assignment; the final slot is then re-solved once per grid point, so every
/// grid point reconfigures the same state.
pub fn sweep_alpha(
    cfg: &ScenarioConfig,
    alphas: &[f64],
    base: Option<&NetworkModel>,
) -> Result<Vec<SweepRow>, ScenarioError> {
    let instance = build_instance(cfg, base)?;
    let final_slot = cfg.slots - 1;
    let prev = if final_slot == 0 {
        Assignment::empty(instance.model.switch_count)
    } else {
        let mut warm = cfg.clone();
        warm.slots = final_slot;
        warm.solver = SolverChoice::Exact;
        let (_, state) = run_scenario_with_state(&warm, base)?;
        state
    };
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let out = solve_exact_with_drops(
            &instance.model,
            &instance.flows,
            &prev,
            &instance.catalog,
            &cfg.solve_config(alpha),
            final_slot,
        )?;
        rows.push(SweepRow {
            alpha,
            energy_j: out.report.energy_j,
            side_effect: out.report.side_effect,
            dropped: out.dropped.len(),
        });
    }
    Ok(rows)
}

// --- solver comparison ---

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedComparison {
    pub seed: u64,
    pub energy_exact: f64,
    pub energy_greedy: f64,
    pub energy_recursive: f64,
    pub ns_exact: u64,
    pub ns_greedy: u64,
    pub ns_recursive: u64,
    pub mean_fault_exact: f64,
    pub mean_fault_greedy: f64,
    pub mean_path_len_exact: f64,
    pub mean_path_len_greedy: f64,
    pub max_link_util_exact: f64,
    pub max_link_util_greedy: f64,
    pub energy_ratio_greedy: Option<f64>,
    pub energy_ratio_recursive: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// False when the exact solver was refused (model above its cap); the
    /// heuristic columns are still filled in.
    pub exact_available: bool,
    pub per_seed: Vec<SeedComparison>,
    pub median_energy_ratio_greedy: Option<f64>,
    /// Order-statistic 95% confidence interval for the median ratio.
    pub ci95_energy_ratio_greedy: Option<(f64, f64)>,
}

fn mean_over_slots(records: &[RunRecord], pick: impl Fn(&RunRecord) -> f64) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().map(&pick).sum::<f64>() / records.len() as f64
}

/// Runs every solver on identical instances across the given seeds and
/// reports per-seed metrics plus the median heuristic/exact energy ratio.
pub fn compare_solvers(
    cfg: &ScenarioConfig,
    seeds: &[u64],
    base: Option<&NetworkModel>,
) -> Result<ComparisonReport, ScenarioError> {
    let n = base.map(|m| m.switch_count).unwrap_or(11);
    let exact_available = n <= cfg.exact_cap_n;
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut c = cfg.clone();
        c.seed = seed;
        c.solver = SolverChoice::Greedy;
        let greedy = run_scenario(&c, base)?;
        c.solver = SolverChoice::Recursive;
        let recursive = run_scenario(&c, base)?;
        let exact = if exact_available {
            c.solver = SolverChoice::Exact;
            Some(run_scenario(&c, base)?)
        } else {
            None
        };
        let energy_greedy = mean_over_slots(&greedy, |r| r.metrics.energy_j);
        let energy_recursive = mean_over_slots(&recursive, |r| r.metrics.energy_j);
        let energy_exact = exact.as_ref().map(|r| mean_over_slots(r, |x| x.metrics.energy_j));
        let ratio = |h: f64| match energy_exact {
            Some(e) if e > 0.0 => Some(h / e),
            _ => None,
        };
        per_seed.push(SeedComparison {
            seed,
            energy_exact: energy_exact.unwrap_or(0.0),
            energy_greedy,
            energy_recursive,
            ns_exact: exact
                .as_ref()
                .map(|r| r.iter().map(|x| x.metrics.side_effect).sum())
                .unwrap_or(0),
            ns_greedy: greedy.iter().map(|x| x.metrics.side_effect).sum(),
            ns_recursive: recursive.iter().map(|x| x.metrics.side_effect).sum(),
            mean_fault_exact: exact
                .as_ref()
                .map(|r| mean_over_slots(r, |x| x.metrics.mean_fault))
                .unwrap_or(0.0),
            mean_fault_greedy: mean_over_slots(&greedy, |r| r.metrics.mean_fault),
            mean_path_len_exact: exact
                .as_ref()
                .map(|r| mean_over_slots(r, |x| x.metrics.mean_path_len))
                .unwrap_or(0.0),
            mean_path_len_greedy: mean_over_slots(&greedy, |r| r.metrics.mean_path_len),
            max_link_util_exact: exact
                .as_ref()
                .map(|r| mean_over_slots(r, |x| x.metrics.max_link_util))
                .unwrap_or(0.0),
            max_link_util_greedy: mean_over_slots(&greedy, |r| r.metrics.max_link_util),
            energy_ratio_greedy: ratio(energy_greedy),
            energy_ratio_recursive: ratio(energy_recursive),
        });
    }
    let mut ratios: Vec<f64> =
        per_seed.iter().filter_map(|s| s.energy_ratio_greedy).collect();
    ratios.sort_by(f64::total_cmp);
    let (median, ci) = if ratios.is_empty() {
        (None, None)
    } else {
        let mid = if ratios.len() % 2 == 1 {
            ratios[ratios.len() / 2]
        } else {
            0.5 * (ratios[ratios.len() / 2 - 1] + ratios[ratios.len() / 2])
        };
        let n = ratios.len() as f64;
        let half = 0.98 * n.sqrt(); // ~1.96 * sqrt(n) / 2
        let lo = ((n / 2.0 - half).floor().max(0.0)) as usize;
        let hi = ((n / 2.0 + half).ceil() as usize).min(ratios.len() - 1);
        (Some(mid), Some((ratios[lo], ratios[hi])))
    };
    Ok(ComparisonReport {
        exact_available,
        per_seed,
        median_energy_ratio_greedy: median,
        ci95_energy_ratio_greedy: ci,
    })
}

// --- persistence ---

pub const CSV_HEADER: &str = "scenario,seed,solver,slot,energy_j,ns,mean_fault,max_fault,mean_path_len,mean_link_util,max_link_util,mean_fog_util,max_fog_util,wall_ms,status";

/// One CSV row per record; with `include_timing` off the wall_ms column is
/// zero so repeated runs produce byte-identical files.
pub fn records_to_csv(records: &[RunRecord], include_timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let m = &r.metrics;
        let wall = if include_timing { r.wall_ms } else { 0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            r.seed,
            r.solver,
            r.slot,
            m.energy_j,
            m.side_effect,
            m.mean_fault,
            m.max_fault,
            m.mean_path_len,
            m.mean_link_util,
            m.max_link_util,
            m.mean_fog_util,
            m.max_fog_util,
            wall,
            r.status,
        ));
    }
    out
}

const METRIC_COLUMNS: [&str; 10] = [
    "energy_j",
    "ns",
    "mean_fault",
    "max_fault",
    "mean_path_len",
    "mean_link_util",
    "max_link_util",
    "mean_fog_util",
    "max_fog_util",
    "wall_ms",
];

fn metric_value(r: &RunRecord, metric: &str, include_timing: bool) -> String {
    let m = &r.metrics;
    match metric {
        "energy_j" => m.energy_j.to_string(),
        "ns" => m.side_effect.to_string(),
        "mean_fault" => m.mean_fault.to_string(),
        "max_fault" => m.max_fault.to_string(),
        "mean_path_len" => m.mean_path_len.to_string(),
        "mean_link_util" => m.mean_link_util.to_string(),
        "max_link_util" => m.max_link_util.to_string(),
        "mean_fog_util" => m.mean_fog_util.to_string(),
        "max_fog_util" => m.max_fog_util.to_string(),
        "wall_ms" => if include_timing { r.wall_ms } else { 0 }.to_string(),
        _ => unreachable!("unknown metric column"),
    }
}

/// Writes the results directory layout: per scenario one consolidated
/// `metrics.csv`, one single-column CSV per metric, and `records.json`.
pub fn write_results(
    records: &[RunRecord],
    dir: &Path,
    include_timing: bool,
) -> Result<(), ScenarioError> {
    let scenarios: BTreeSet<&str> = records.iter().map(|r| r.scenario.as_str()).collect();
    for scenario in scenarios {
        let rows: Vec<RunRecord> =
            records.iter().filter(|r| r.scenario == scenario).cloned().collect();
        let sub = dir.join(scenario);
        std::fs::create_dir_all(&sub)?;
        std::fs::write(sub.join("metrics.csv"), records_to_csv(&rows, include_timing))?;
        for metric in METRIC_COLUMNS {
            let mut body = String::from("scenario,seed,solver,slot,value\n");
            for r in &rows {
                body.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.scenario,
                    r.seed,
                    r.solver,
                    r.slot,
                    metric_value(r, metric, include_timing)
                ));
            }
            std::fs::write(sub.join(format!("{metric}.csv")), body)?;
        }
        std::fs::write(sub.join("records.json"), serde_json::to_string_pretty(&rows)?)?;
    }
    Ok(())
}
