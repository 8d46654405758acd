//! Folding of lowered networks onto a platform budget: feasibility, dataflow
//! balancing, offload scheduling, performance, rooflines and sweeps.

mod balance;
mod folding;
mod perf;
mod roofline;
mod schedule;
mod sweep;

use serde::Serialize;
use thiserror::Error;

use crate::cost::{
    accelerator_cost, layer_cost, AcceleratorCost, Arch, CostCoefficients, CostError, Folding, PlatformSpec,
    ResourceEstimate,
};
use crate::passes::{BlockGraph, LoweredKind, PassError};

pub use balance::{balance_dataflow, balance_dataflow_traced, complexity, BalanceStep, BalanceTrace};
pub use folding::{
    clamp_to_layer, divisors, largest_divisor_at_most, max_parallelism, next_divisor, tile_layer, tile_parallelism,
    LayerFolding,
};
pub use perf::{block_cycles, estimate_performance, Band, BlockBound, LayerPerf, PerfEstimate, CONFIDENCE};
pub use roofline::{compute_roof, roofline, Roofline, RooflinePoint};
pub use schedule::{schedule_multilayer_offload, Boundness, Schedule, ScheduledLayer};
pub use sweep::{
    assign_precision, default_precision, pareto_front, sweep, DesignPoint, SweepCombination, SweepResult,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DseError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Pass(#[from] PassError),
    #[error("folding lists {found} layers, the network has {expected}")]
    FoldingCount { expected: usize, found: usize },
    #[error("unknown layer `{0}` in folding")]
    UnknownLayer(String),
    #[error("engine geometry {0:?} has a zero dimension")]
    EngineTooSmall(Folding),
    #[error("no feasible design: {0}")]
    NoFeasibleDesign(String),
}

impl DseError {
    pub fn kind(&self) -> &'static str {
        match self {
            DseError::Cost(e) => e.kind(),
            DseError::Pass(e) => e.kind(),
            DseError::FoldingCount { .. } => "FoldingCount",
            DseError::UnknownLayer(_) => "UnknownLayer",
            DseError::EngineTooSmall(_) => "EngineTooSmall",
            DseError::NoFeasibleDesign(_) => "NoFeasibleDesign",
        }
    }
}

/// Remaining resources under the platform ceilings; negative when exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slack {
    pub luts: f64,
    pub bram18: i64,
    pub dsps: i64,
}

impl Slack {
    pub fn between(budget: ResourceEstimate, used: ResourceEstimate) -> Self {
        Self {
            luts: budget.luts - used.luts,
            bram18: budget.bram18 as i64 - used.bram18 as i64,
            dsps: budget.dsps as i64 - used.dsps as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub cost: AcceleratorCost,
    pub budget: ResourceEstimate,
    pub slack: Slack,
}

/// Per-layer costs of a folding, aligned with `graph.layers`.
pub fn layer_costs(
    graph: &BlockGraph,
    foldings: &[Folding],
    arch: Arch,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<Vec<ResourceEstimate>, DseError> {
    if foldings.len() != graph.layers.len() {
        return Err(DseError::FoldingCount { expected: graph.layers.len(), found: foldings.len() });
    }
    graph
        .layers
        .iter()
        .zip(foldings)
        .map(|(l, &f)| layer_cost(l, f, arch, platform, coeffs).map_err(DseError::from))
        .collect()
}

fn judge(cost: AcceleratorCost, platform: &PlatformSpec) -> Feasibility {
    let budget = platform.budget();
    Feasibility { feasible: cost.total.fits(&budget), slack: Slack::between(budget, cost.total), budget, cost }
}

/// Whether the accelerator built from `foldings` fits the platform ceilings.
/// For [`Arch::Mo`] each folding is the engine as applied to that layer.
pub fn feasible(
    graph: &BlockGraph,
    foldings: &[Folding],
    arch: Arch,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<Feasibility, DseError> {
    let costs = layer_costs(graph, foldings, arch, platform, coeffs)?;
    Ok(judge(accelerator_cost(&costs, arch, platform, coeffs), platform))
}

/// Foldings of every layer when a single engine runs them all.
pub fn engine_foldings(graph: &BlockGraph, engine: Folding) -> Vec<Folding> {
    graph.layers.iter().map(|l| clamp_to_layer(engine, &l.geometry)).collect()
}

/// Feasibility of an offload engine.
pub fn engine_feasible(
    graph: &BlockGraph,
    engine: Folding,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<Feasibility, DseError> {
    if engine.p == 0 || engine.q == 0 || engine.m == 0 {
        return Err(DseError::EngineTooSmall(engine));
    }
    feasible(graph, &engine_foldings(graph, engine), Arch::Mo, platform, coeffs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerDesign {
    pub layer: String,
    pub kind: LoweredKind,
    pub folding: Folding,
    pub cost: ResourceEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceleratorDesign {
    pub network: String,
    pub platform: String,
    pub arch: Arch,
    pub profile: String,
    pub calibrated: bool,
    pub feasible: bool,
    /// Offload engine geometry; `None` for dataflow designs.
    pub engine: Option<Folding>,
    pub layers: Vec<LayerDesign>,
    pub cost: AcceleratorCost,
    pub budget: ResourceEstimate,
    pub slack: Slack,
    /// Total LUTs with the model's confidence band applied.
    pub lut_band: Band,
    pub perf: PerfEstimate,
    pub schedule: Option<Schedule>,
    pub warnings: Vec<String>,
}

impl AcceleratorDesign {
    pub fn foldings(&self) -> Vec<Folding> {
        self.layers.iter().map(|l| l.folding).collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    graph: &BlockGraph,
    foldings: &[Folding],
    costs: Vec<ResourceEstimate>,
    arch: Arch,
    engine: Option<Folding>,
    perf: PerfEstimate,
    schedule: Option<Schedule>,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> AcceleratorDesign {
    let verdict = judge(accelerator_cost(&costs, arch, platform, coeffs), platform);
    let mut warnings = graph.warnings();
    if verdict.feasible && verdict.cost.total.luts * (1.0 + CONFIDENCE) > verdict.budget.luts {
        warnings.push("MarginalLuts: feasibility within the model's confidence band".into());
    }
    if arch == Arch::Mo {
        warnings.push("AssumedControlOverhead: offload control cost is a configured estimate".into());
    }
    AcceleratorDesign {
        network: graph.network.clone(),
        platform: platform.name.clone(),
        arch,
        profile: coeffs.profile.clone(),
        calibrated: coeffs.calibrated,
        feasible: verdict.feasible,
        engine,
        layers: graph
            .layers
            .iter()
            .zip(foldings)
            .zip(costs)
            .map(|((l, &folding), cost)| LayerDesign {
                layer: l.layer.clone(),
                kind: l.geometry.kind,
                folding,
                cost,
            })
            .collect(),
        lut_band: Band::around(verdict.cost.total.luts),
        cost: verdict.cost,
        budget: verdict.budget,
        slack: verdict.slack,
        perf,
        schedule,
        warnings,
    }
}

/// Dataflow design at the given per-layer foldings.
pub fn dataflow_design(
    graph: &BlockGraph,
    foldings: &[Folding],
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<AcceleratorDesign, DseError> {
    let costs = layer_costs(graph, foldings, Arch::Df, platform, coeffs)?;
    let perf = estimate_performance(graph, foldings, platform)?;
    Ok(assemble(graph, foldings, costs, Arch::Df, None, perf, None, platform, coeffs))
}

/// Offload design running every layer on one engine.
pub fn offload_design(
    graph: &BlockGraph,
    engine: Folding,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<AcceleratorDesign, DseError> {
    let (schedule, perf) = schedule_multilayer_offload(graph, engine, platform)?;
    let foldings = engine_foldings(graph, engine);
    let costs = layer_costs(graph, &foldings, Arch::Mo, platform, coeffs)?;
    Ok(assemble(graph, &foldings, costs, Arch::Mo, Some(engine), perf, Some(schedule), platform, coeffs))
}

fn powers_of_two_up_to(n: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |&v| Some(v * 2)).take_while(|&v| v <= n.max(1)).collect()
}

/// Fastest feasible offload engine over power-of-two geometries. Lanes range
/// up to the widest layer input, PEs up to the widest layer output and rows
/// up to the tallest output map; ties go to the cheaper engine in LUTs.
///
/// The minimal engine is not always the cheapest: narrow engines spread the
/// weight buffer over many barely used BRAM columns.
pub fn size_offload_engine(
    graph: &BlockGraph,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<Folding, DseError> {
    let compute = || graph.layers.iter().filter(|l| l.geometry.kind != LoweredKind::Pool);
    let max_c = compute().map(|l| l.geometry.c as u64).max().unwrap_or(1);
    let max_c_out = compute().map(|l| l.geometry.c_out as u64).max().unwrap_or(1);
    let max_rows = graph.layers.iter().map(|l| l.geometry.rows_out as u64).max().unwrap_or(1);
    let mut best: Option<(Folding, f64, f64)> = None;
    for &q in &powers_of_two_up_to(max_c) {
        for &p in &powers_of_two_up_to(max_c_out) {
            for &m in &powers_of_two_up_to(max_rows) {
                let engine = Folding::new(p, q, m);
                let verdict = engine_feasible(graph, engine, platform, coeffs)?;
                if !verdict.feasible {
                    continue;
                }
                let (_, perf) = schedule_multilayer_offload(graph, engine, platform)?;
                let luts = verdict.cost.total.luts;
                let better = match best {
                    None => true,
                    Some((_, t, l)) => perf.throughput_gops > t || (perf.throughput_gops == t && luts < l),
                };
                if better {
                    best = Some((engine, perf.throughput_gops, luts));
                }
            }
        }
    }
    best.map(|(e, _, _)| e).ok_or_else(|| {
        DseError::NoFeasibleDesign(format!("no offload engine fits the `{}` budget", platform.name))
    })
}

/// Sized offload design for the platform.
pub fn best_offload_design(
    graph: &BlockGraph,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<AcceleratorDesign, DseError> {
    let engine = size_offload_engine(graph, platform, coeffs)?;
    offload_design(graph, engine, platform, coeffs)
}
