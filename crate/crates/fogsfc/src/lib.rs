//! Energy- and fault-aware service function chain routing for fog-supported
//! SDNs.
//!
//! The crate models a network of SDN switches with attached Fog Nodes,
//! generates reproducible traffic demands, and assigns routes plus VNF
//! placements to flows under link-capacity, delay, loop-freedom, chaining,
//! and end-to-end fault-probability constraints. Two solvers are provided:
//! an exact branch-and-bound minimizing the weighted energy/side-effect
//! objective (the optimality oracle at small scale) and a pair of fast
//! heuristics (recursive and greedy) for larger instances. A scenario runner
//! drives the per-slot event loop of new-flow arrivals, switch failures, and
//! periodic reconfiguration, and records the evaluation metrics.
//!
//! Entry points:
//! - [`model`]: domain types, the built-in Abilene topology, topology JSON.
//! - [`flowgen`]: seeded traffic-demand generator and Fog Node placement.
//! - [`feasibility`]: every constraint check, the objective, and metrics.
//! - [`exact`]: exhaustive/branch-and-bound solver and failure recovery.
//! - [`heuristic`]: the recursive and greedy heuristics.
//! - [`scenario`]: scenario table, event loop, alpha sweep, solver compare.

pub mod exact;
pub mod feasibility;
pub mod flowgen;
pub mod heuristic;
pub mod model;
pub mod scenario;

pub use exact::{solve_exact, SolveConfig};
pub use feasibility::{evaluate, metrics, ConstraintReport, MetricsReport};
pub use flowgen::{assign_fog_placement, generate_demands, GeneratorParams};
pub use heuristic::{hfes_greedy, hfes_recursive, HeuristicOutcome};
pub use model::{abilene, load_topology, Assignment, FlowSpec, NetworkModel, VnfCatalog};
pub use scenario::{run_scenario, ScenarioConfig};
