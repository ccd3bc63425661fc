//! Traffic-demand generator: reproducible flow populations and Fog Node
//! placement driven by a single seed.
//!
//! Flow counts per source follow a truncated geometric distribution, VNF
//! request sizes follow a clipped geometric distribution, and rates are
//! uniform in `(0, 2 * rate_fraction * reference_capacity]`, so the mean rate
//! is `rate_fraction` times the reference link capacity.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FlowSpec, FogNode, NetworkModel, VnfCatalog};

/// Distinct RNG stream for Fog Node placement so demand draws stay identical
/// whether or not placement is regenerated.
const FOG_STREAM_SALT: u64 = 0x666f_675f;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    InvalidParams(String),
    #[error("no eligible source/destination switches (check edge ratios)")]
    NoEligibleEndpoints,
    #[error("model needs at least two switches")]
    ModelTooSmall,
}

/// Generator inputs: the scenario-table parameters plus the artifact knobs
/// (seed, slot count, fog sizing, delay allowance) the table leaves open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Ratio of mean flow rate to the reference link capacity.
    pub rate_fraction: f64,
    /// Ratio of Fog Nodes to switches.
    pub fog_ratio: f64,
    /// Mean of the requested-VNF-count distribution.
    pub mean_requested: f64,
    /// Fraction of VNF types each Fog Node hosts.
    pub vnf_host_fraction: f64,
    /// Clip bounds for the requested-VNF count.
    pub min_requested: usize,
    pub max_requested: usize,
    /// Edge-switch ratio and the source/destination ratios within the edge.
    pub edge_ratio: f64,
    pub source_ratio: f64,
    pub dest_ratio: f64,
    /// Coefficient of the mean flow count per source (`mean = omega * N_d`).
    pub flow_coefficient: f64,
    /// Hard cap on flows per source (geometric truncation point).
    pub max_flows_per_source: u64,
    /// Number of VNF types.
    pub vnf_count: usize,
    /// RNG seed; identical seeds reproduce identical demand sets.
    pub seed: u64,
    /// Number of time slots to draw rates for (rates are i.i.d. per slot).
    pub slots: usize,
    /// Processing units per unit rate, uniform over VNF types.
    pub proc_per_unit: f64,
    /// Processing time per unit of data in ms, uniform over VNF types.
    pub proc_time_ms: f64,
    /// Fog Node sizing used by `assign_fog_placement`.
    pub fog_capacity: f64,
    pub fog_power_w: f64,
    pub fog_idle_fraction: f64,
    /// Delay budgets allow this many reference-delay hops of propagation.
    pub delay_allowance_hops: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            rate_fraction: 0.05,
            fog_ratio: 0.5,
            mean_requested: 2.0,
            vnf_host_fraction: 0.7,
            min_requested: 2,
            max_requested: 5,
            edge_ratio: 1.0,
            source_ratio: 1.0,
            dest_ratio: 1.0,
            flow_coefficient: 0.4,
            max_flows_per_source: 10,
            vnf_count: 10,
            seed: 0,
            slots: 1,
            proc_per_unit: 1.0,
            proc_time_ms: 3.0,
            fog_capacity: 3000.0,
            fog_power_w: 200.0,
            fog_idle_fraction: 0.9,
            delay_allowance_hops: 3.0,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let ratios = [
            ("rate_fraction", self.rate_fraction),
            ("fog_ratio", self.fog_ratio),
            ("vnf_host_fraction", self.vnf_host_fraction),
            ("edge_ratio", self.edge_ratio),
            ("source_ratio", self.source_ratio),
            ("dest_ratio", self.dest_ratio),
        ];
        for (name, v) in ratios {
            if !(0.0..=1.0).contains(&v) {
                return Err(GenError::InvalidParams(format!("{name} must be in [0,1], got {v}")));
            }
        }
        if self.mean_requested < 1.0 {
            return Err(GenError::InvalidParams("mean_requested must be >= 1".into()));
        }
        if self.min_requested > self.max_requested {
            return Err(GenError::InvalidParams("min_requested > max_requested".into()));
        }
        if self.max_flows_per_source == 0 {
            return Err(GenError::InvalidParams("max_flows_per_source must be >= 1".into()));
        }
        if self.flow_coefficient <= 0.0 {
            return Err(GenError::InvalidParams("flow_coefficient must be positive".into()));
        }
        if self.vnf_count == 0 {
            return Err(GenError::InvalidParams("vnf_count must be positive".into()));
        }
        if self.slots == 0 {
            return Err(GenError::InvalidParams("slots must be >= 1".into()));
        }
        Ok(())
    }

    /// The uniform VNF catalog implied by these parameters.
    pub fn catalog(&self) -> VnfCatalog {
        VnfCatalog::uniform(self.vnf_count, self.proc_per_unit, self.proc_time_ms)
    }
}

/// Round-half-up used everywhere a fractional switch count appears.
pub fn round_count(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Geometric draw on `{1, 2, ...}` with the given mean (success probability
/// `1 / mean`), truncated so values above `cap` become `cap`.
fn truncated_geometric(rng: &mut ChaCha8Rng, mean: f64, cap: u64) -> u64 {
    let p = (1.0 / mean).clamp(f64::MIN_POSITIVE, 1.0);
    let draw = Geometric::new(p).expect("p in (0,1]").sample(rng) + 1;
    draw.min(cap)
}

/// Uniform in `(0, max]`.
fn uniform_open_closed(rng: &mut ChaCha8Rng, max: f64) -> f64 {
    (1.0 - rng.random::<f64>()) * max
}

fn sample_sorted(rng: &mut ChaCha8Rng, pool: &[usize], amount: usize) -> Vec<usize> {
    let idx = rand::seq::index::sample(rng, pool.len(), amount.min(pool.len()));
    let mut out: Vec<usize> = idx.into_iter().map(|i| pool[i]).collect();
    out.sort_unstable();
    out
}

/// Draws the flow population for `model` under `params`.
///
/// Deterministic for a given `(model, params)` pair: the same seed always
/// yields a byte-identical demand set.
pub fn generate_demands(
    model: &NetworkModel,
    params: &GeneratorParams,
) -> Result<Vec<FlowSpec>, GenError> {
    params.validate()?;
    let n = model.switch_count;
    if n < 2 {
        return Err(GenError::ModelTooSmall);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let n_edge = round_count(params.edge_ratio * n as f64);
    let n_src = round_count(params.edge_ratio * params.source_ratio * n as f64);
    let n_dst = round_count(params.edge_ratio * params.dest_ratio * n as f64);
    if n_src == 0 || n_dst == 0 {
        return Err(GenError::NoEligibleEndpoints);
    }
    let all: Vec<usize> = (0..n).collect();
    let edge = sample_sorted(&mut rng, &all, n_edge);
    let sources = sample_sorted(&mut rng, &edge, n_src);
    let dests = sample_sorted(&mut rng, &edge, n_dst);
    if dests.is_empty() || (dests.len() == 1 && sources == dests) {
        return Err(GenError::NoEligibleEndpoints);
    }

    let ref_cap = model.reference_capacity();
    let ref_delay = model.reference_delay();
    let rate_max = 2.0 * params.rate_fraction * ref_cap;
    let mean_flows = params.flow_coefficient * n_dst as f64;
    let request_cap = params.max_requested.min(params.vnf_count).max(params.min_requested) as u64;

    let mut flows = Vec::new();
    let mut id = 0usize;
    for &src in &sources {
        let count = truncated_geometric(&mut rng, mean_flows, params.max_flows_per_source);
        for _ in 0..count {
            let eligible: Vec<usize> = dests.iter().copied().filter(|&d| d != src).collect();
            if eligible.is_empty() {
                return Err(GenError::NoEligibleEndpoints);
            }
            let dest = eligible[rng.random_range(0..eligible.len())];

            let want = truncated_geometric(&mut rng, params.mean_requested, request_cap)
                .max(params.min_requested as u64) as usize;
            let vnf_pool: Vec<usize> = (0..params.vnf_count).collect();
            let chosen = sample_sorted(&mut rng, &vnf_pool, want);
            let mut requested = vec![false; params.vnf_count];
            for &x in &chosen {
                requested[x] = true;
            }

            let rate: Vec<f64> =
                (0..params.slots).map(|_| uniform_open_closed(&mut rng, rate_max)).collect();

            let max_rate = rate.iter().cloned().fold(0.0, f64::max);
            let service_ms = chosen.len() as f64 * params.proc_time_ms * max_rate;
            let max_delay_ms = service_ms + params.delay_allowance_hops * ref_delay;

            flows.push(FlowSpec {
                id,
                source: src,
                dest,
                rate,
                requested: vec![requested; params.slots],
                max_delay_ms,
            });
            id += 1;
        }
    }
    Ok(flows)
}

/// Places `round(fog_ratio * N)` Fog Nodes on uniformly chosen switches, each
/// hosting `round(vnf_host_fraction * X)` uniformly chosen VNF types. Existing
/// Fog Nodes are replaced.
pub fn assign_fog_placement(
    model: &NetworkModel,
    params: &GeneratorParams,
) -> Result<NetworkModel, GenError> {
    params.validate()?;
    let n = model.switch_count;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ FOG_STREAM_SALT);

    let fog_count = round_count(params.fog_ratio * n as f64).min(n);
    let types_per_fog = round_count(params.vnf_host_fraction * params.vnf_count as f64)
        .min(params.vnf_count);

    let all: Vec<usize> = (0..n).collect();
    let hosts = sample_sorted(&mut rng, &all, fog_count);
    let vnf_pool: Vec<usize> = (0..params.vnf_count).collect();

    let mut out = model.clone();
    out.fog_nodes = vec![None; n];
    for &host in &hosts {
        let types = sample_sorted(&mut rng, &vnf_pool, types_per_fog);
        let mut supported = vec![false; params.vnf_count];
        for &x in &types {
            supported[x] = true;
        }
        out.fog_nodes[host] = Some(FogNode {
            host_switch: host,
            capacity: params.fog_capacity,
            supported_vnfs: supported,
            power_on_watts: params.fog_power_w,
            idle_fraction: params.fog_idle_fraction,
        });
    }
    Ok(out)
}
