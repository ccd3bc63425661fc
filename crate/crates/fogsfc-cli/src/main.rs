//! Command-line front end: topology tooling, demand generation, one-shot
//! solves, scenario runs, the alpha sweep, and the solver comparison.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fogsfc::exact::{recover_from_failure, solve_exact_with_drops, SolveConfig, SolveStatus};
use fogsfc::feasibility::ConstraintReport;
use fogsfc::heuristic::{hfes_greedy_slot, solve_recursive, DroppedFlow};
use fogsfc::model::{
    abilene, Assignment, FlowSpec, NetworkModel, TopologyDoc, VnfCatalog,
};
use fogsfc::scenario::{
    compare_solvers, records_to_csv, run_scenario, sweep_alpha, write_results, RunRecord,
    ScenarioConfig, SolverChoice,
};

#[derive(Parser)]
#[command(name = "fogsfc", version, about = "Energy- and fault-aware SFC routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit or validate topology documents.
    Topology {
        #[command(subcommand)]
        action: TopologyAction,
    },
    /// Generate a seeded demand set for a scenario.
    Flowgen(FlowgenArgs),
    /// Solve one slot exactly (branch and bound).
    SolveExact(SolveArgs),
    /// Solve one slot with a heuristic.
    SolveHeuristic(SolveHeuristicArgs),
    /// Run a scenario's event loop over one or more seeds.
    Run(RunArgs),
    /// Re-solve one instance across an alpha grid (exact solver).
    SweepAlpha(SweepArgs),
    /// Run every solver on identical instances and report the gaps.
    Compare(CompareArgs),
}

#[derive(Subcommand)]
enum TopologyAction {
    /// Write the built-in topology (optionally with scenario fog placement).
    Emit {
        /// Scenario preset providing fog placement parameters (S1..S9).
        #[arg(long)]
        scenario: Option<String>,
        /// Placement seed (only used with --scenario).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a topology document.
    Validate { file: PathBuf },
}

#[derive(Args)]
struct FlowgenArgs {
    /// Scenario preset (S1..S9).
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Topology document; defaults to the built-in network.
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Number of time slots to draw per-slot rates for.
    #[arg(long, default_value_t = 1)]
    slots: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    demands: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Previous assignment (defaults to all-zero).
    #[arg(long)]
    prev: Option<PathBuf>,
    /// Slot index to solve.
    #[arg(long, default_value_t = 0)]
    slot: usize,
    /// Re-place only the flows touching these failed switches.
    #[arg(long, value_delimiter = ',')]
    failed: Vec<usize>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long)]
    path_budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveHeuristicArgs {
    #[arg(long, value_enum)]
    algorithm: HeuristicKind,
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    demands: PathBuf,
    #[arg(long)]
    prev: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    slot: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum HeuristicKind {
    Greedy,
    Recursive,
}

#[derive(Copy, Clone, ValueEnum)]
enum RunSolver {
    Exact,
    Recursive,
    Greedy,
    /// Exact and greedy on identical instances.
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario preset (S1..S9); alternative to --config.
    #[arg(long)]
    scenario: Option<String>,
    /// Full scenario config as JSON (overrides the preset fields).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of seeds to run (0..seeds added to --seed-base).
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long, value_enum, default_value_t = RunSolver::Greedy)]
    solver: RunSolver,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Results directory; defaults to $FOGSFC_RESULTS_DIR or ./results.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Record measured wall-clock times in the CSV (breaks byte-for-byte
    /// reproducibility of the output files).
    #[arg(long, default_value_t = false)]
    timing: bool,
    #[arg(long)]
    time_limit_ms: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    slots: Option<usize>,
    /// Comma-separated alpha grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.001, 0.004, 0.005, 0.1, 0.75, 1.0])]
    alphas: Vec<f64>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Topology { action } => topology(action),
        Command::Flowgen(args) => flowgen(args),
        Command::SolveExact(args) => solve_exact_cmd(args),
        Command::SolveHeuristic(args) => solve_heuristic_cmd(args),
        Command::Run(args) => run(args),
        Command::SweepAlpha(args) => sweep(args),
        Command::Compare(args) => compare(args),
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{content}"),
    }
    Ok(())
}

fn load_model(path: Option<&Path>) -> Result<(NetworkModel, VnfCatalog)> {
    match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let doc = TopologyDoc::parse(&text)?;
            let model = doc.build()?;
            let catalog = doc
                .catalog
                .unwrap_or_else(|| VnfCatalog::uniform(default_vnf_count(&model), 1.0, 3.0));
            Ok((model, catalog))
        }
        None => {
            let model = abilene();
            Ok((model, VnfCatalog::uniform(10, 1.0, 3.0)))
        }
    }
}

/// VNF count implied by the fog vectors, falling back to the scenario default.
fn default_vnf_count(model: &NetworkModel) -> usize {
    model
        .fog_nodes
        .iter()
        .flatten()
        .map(|f| f.supported_vnfs.len())
        .max()
        .unwrap_or(10)
}

fn load_demands(path: &Path) -> Result<Vec<FlowSpec>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn load_prev(path: Option<&Path>, n: usize) -> Result<Assignment> {
    match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(serde_json::from_str(&text)?)
        }
        None => Ok(Assignment::empty(n)),
    }
}

fn topology(action: TopologyAction) -> Result<()> {
    match action {
        TopologyAction::Emit { scenario, seed, out } => {
            let model = match &scenario {
                Some(id) => {
                    let cfg = ScenarioConfig::preset(id, seed)?;
                    let mut params = cfg.params.clone();
                    params.seed = seed;
                    fogsfc::flowgen::assign_fog_placement(&abilene(), &params)?
                }
                None => abilene(),
            };
            let catalog = VnfCatalog::uniform(10, 1.0, 3.0);
            let doc = TopologyDoc::from_model(&model, Some(&catalog));
            write_or_print(out.as_deref(), &doc.to_json())
        }
        TopologyAction::Validate { file } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let model = fogsfc::load_topology(&text)?;
            println!(
                "ok: {} switches, {} directed links, {} fog nodes",
                model.switch_count,
                model.directed_link_count(),
                model.fog_nodes.iter().flatten().count()
            );
            Ok(())
        }
    }
}

fn flowgen(args: FlowgenArgs) -> Result<()> {
    let (model, _) = load_model(args.topology.as_deref())?;
    let cfg = ScenarioConfig::preset(&args.scenario, args.seed)?;
    let mut params = cfg.params;
    params.seed = args.seed;
    params.slots = args.slots;
    let flows = fogsfc::generate_demands(&model, &params)?;
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&flows)?)
}

#[derive(serde::Serialize)]
struct SolveDump {
    status: String,
    objective: f64,
    dropped: Vec<DroppedFlow>,
    assignment: Assignment,
    report: ConstraintReport,
}

fn dump_solution(
    out: Option<&Path>,
    status: String,
    objective: f64,
    dropped: Vec<DroppedFlow>,
    assignment: Assignment,
    report: ConstraintReport,
) -> Result<()> {
    eprintln!(
        "{status}: objective {objective}, energy {} J, side-effect {}, {} dropped",
        report.energy_j,
        report.side_effect,
        dropped.len()
    );
    let dump = SolveDump { status, objective, dropped, assignment, report };
    write_or_print(out, &serde_json::to_string_pretty(&dump)?)
}

fn solve_exact_cmd(args: SolveArgs) -> Result<()> {
    let (model, catalog) = load_model(Some(&args.topology))?;
    let flows = load_demands(&args.demands)?;
    let prev = load_prev(args.prev.as_deref(), model.switch_count)?;
    let config = SolveConfig {
        alpha: args.alpha,
        beta: 1.0 - args.alpha,
        time_limit_ms: args.time_limit_ms,
        path_budget: args.path_budget,
        ..Default::default()
    };
    if args.failed.is_empty() {
        let out = solve_exact_with_drops(&model, &flows, &prev, &catalog, &config, args.slot)?;
        let status = match out.status {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleNotProven => "feasible",
        };
        dump_solution(
            args.out.as_deref(),
            status.to_string(),
            out.objective,
            out.dropped,
            out.assignment,
            out.report,
        )
    } else {
        let failed: BTreeSet<usize> = args.failed.iter().copied().collect();
        let out =
            recover_from_failure(&model, &flows, &prev, &failed, &catalog, &config, args.slot)?;
        dump_solution(
            args.out.as_deref(),
            format!("recovered({} replaced)", out.replaced.len()),
            out.objective,
            out.dropped,
            out.assignment,
            out.report,
        )
    }
}

fn solve_heuristic_cmd(args: SolveHeuristicArgs) -> Result<()> {
    let (model, catalog) = load_model(Some(&args.topology))?;
    let flows = load_demands(&args.demands)?;
    let prev = load_prev(args.prev.as_deref(), model.switch_count)?;
    let outcome = match args.algorithm {
        HeuristicKind::Greedy => hfes_greedy_slot(&model, &flows, &catalog, &prev, args.slot),
        HeuristicKind::Recursive => solve_recursive(&model, &flows, &catalog, &prev, args.slot),
    };
    let report = fogsfc::evaluate(
        &model,
        &flows,
        &catalog,
        &prev,
        &outcome.assignment,
        0.5,
        0.5,
        args.slot,
    )?;
    dump_solution(
        args.out.as_deref(),
        "heuristic".to_string(),
        report.objective_value,
        outcome.dropped,
        outcome.assignment,
        report,
    )
}

fn build_config(
    scenario: Option<&str>,
    config: Option<&Path>,
    seed: u64,
    slots: Option<usize>,
    alpha: Option<f64>,
    time_limit_ms: Option<u64>,
) -> Result<ScenarioConfig> {
    let mut cfg = match (scenario, config) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ScenarioConfig>(&text)?
        }
        (Some(id), None) => ScenarioConfig::preset(id, seed)?,
        (None, None) => bail!("pass --scenario S1..S9 or --config FILE"),
    };
    cfg.seed = seed;
    if let Some(t) = slots {
        cfg.slots = t;
    }
    if let Some(a) = alpha {
        cfg.alpha = a;
        cfg.beta = 1.0 - a;
    }
    if time_limit_ms.is_some() {
        cfg.time_limit_ms = time_limit_ms;
    }
    Ok(cfg)
}

fn results_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("FOGSFC_RESULTS_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn run(args: RunArgs) -> Result<()> {
    let solvers: Vec<SolverChoice> = match args.solver {
        RunSolver::Exact => vec![SolverChoice::Exact],
        RunSolver::Recursive => vec![SolverChoice::Recursive],
        RunSolver::Greedy => vec![SolverChoice::Greedy],
        RunSolver::Both => vec![SolverChoice::Exact, SolverChoice::Greedy],
    };
    let mut records: Vec<RunRecord> = Vec::new();
    for seed in args.seed_base..args.seed_base + args.seeds {
        for &solver in &solvers {
            let mut cfg = build_config(
                args.scenario.as_deref(),
                args.config.as_deref(),
                seed,
                args.slots,
                args.alpha,
                args.time_limit_ms,
            )?;
            cfg.solver = solver;
            records.extend(run_scenario(&cfg, None)?);
        }
    }
    records.sort_by(|a, b| {
        (&a.scenario, a.seed, &a.solver, a.slot).cmp(&(&b.scenario, b.seed, &b.solver, b.slot))
    });
    let dir = results_dir(args.out_dir);
    write_results(&records, &dir, args.timing)?;
    print!("{}", records_to_csv(&records, args.timing));
    eprintln!("results under {}", dir.display());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let cfg = build_config(
        args.scenario.as_deref(),
        args.config.as_deref(),
        args.seed,
        args.slots,
        None,
        args.time_limit_ms,
    )?;
    let rows = sweep_alpha(&cfg, &args.alphas, None)?;
    let mut csv = String::from("alpha,energy_j,ns,dropped\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.alpha, r.energy_j, r.side_effect, r.dropped));
    }
    write_or_print(args.out.as_deref(), &csv)
}

fn compare(args: CompareArgs) -> Result<()> {
    let cfg = build_config(
        args.scenario.as_deref(),
        args.config.as_deref(),
        args.seed_base,
        args.slots,
        None,
        args.time_limit_ms,
    )?;
    let seeds: Vec<u64> = (args.seed_base..args.seed_base + args.seeds).collect();
    let report = compare_solvers(&cfg, &seeds, None)?;
    if let Some(median) = report.median_energy_ratio_greedy {
        eprintln!(
            "median greedy/exact energy ratio {median}{}",
            report
                .ci95_energy_ratio_greedy
                .map(|(lo, hi)| format!(" (95% CI {lo}..{hi})"))
                .unwrap_or_default()
        );
    }
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)
}
