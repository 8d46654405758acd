//! Dataflow balancing: grow the parallelism of the slowest layer until the
//! budget is exhausted.

use serde::Serialize;

use super::folding::{max_parallelism, next_divisor, tile_layer};
use super::perf::estimate_performance;
use super::{best_offload_design, dataflow_design, AcceleratorDesign, DseError};
use crate::cost::{accelerator_cost, layer_cost, Arch, CostCoefficients, Folding, PlatformSpec, ResourceEstimate};
use crate::passes::{BlockGraph, LoweredKind};

/// One assignment of cumulative parallelism visited by the balancer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceStep {
    /// Layer whose factor was raised to reach this assignment.
    pub scaled: Option<String>,
    /// Cumulative factor per compute layer.
    pub m: Vec<u64>,
    pub max_ratio: f64,
    pub throughput_gops: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceTrace {
    /// Compute layers in balancing order.
    pub layers: Vec<String>,
    /// MACs per frame of each compute layer.
    pub complexity: Vec<u64>,
    /// Accepted assignments, starting with the all-ones one.
    pub steps: Vec<BalanceStep>,
    /// First assignment that broke the budget, if any.
    pub rejected: Option<BalanceStep>,
    /// Set when even the all-ones assignment was infeasible.
    pub fell_back: bool,
}

/// Compute requirement per compute layer (MACs per frame), in layer order.
pub fn complexity(graph: &BlockGraph) -> Vec<(String, u64)> {
    graph
        .layers
        .iter()
        .filter(|l| l.geometry.kind != LoweredKind::Pool)
        .map(|l| (l.layer.clone(), l.geometry.macs()))
        .collect()
}

pub fn balance_dataflow(
    graph: &BlockGraph,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<AcceleratorDesign, DseError> {
    balance_dataflow_traced(graph, platform, coeffs).map(|(d, _)| d)
}

struct State<'a> {
    graph: &'a BlockGraph,
    /// Index into `graph.layers` of every compute layer.
    compute: Vec<usize>,
    foldings: Vec<Folding>,
    costs: Vec<ResourceEstimate>,
}

impl State<'_> {
    fn fits(&self, platform: &PlatformSpec, coeffs: &CostCoefficients) -> bool {
        accelerator_cost(&self.costs, Arch::Df, platform, coeffs).total.fits(&platform.budget())
    }

    fn step(&self, scaled: Option<String>, m: &[u64], ratio: f64, feasible: bool, platform: &PlatformSpec) -> BalanceStep {
        let throughput = estimate_performance(self.graph, &self.foldings, platform)
            .map_or(0.0, |p| p.throughput_gops);
        BalanceStep { scaled, m: m.to_vec(), max_ratio: ratio, throughput_gops: throughput, feasible }
    }
}

fn max_ratio(a: &[u64], m: &[u64]) -> f64 {
    a.iter().zip(m).map(|(&a, &m)| a as f64 / m as f64).fold(0.0, f64::max)
}

/// Balancing with the visited assignments. Falls back to a sized offload
/// engine when the minimal dataflow design does not fit.
pub fn balance_dataflow_traced(
    graph: &BlockGraph,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<(AcceleratorDesign, BalanceTrace), DseError> {
    let compute: Vec<usize> = graph
        .layers
        .iter()
        .enumerate()
        .filter(|(_, l)| l.geometry.kind != LoweredKind::Pool)
        .map(|(i, _)| i)
        .collect();
    let a: Vec<u64> = compute.iter().map(|&i| graph.layers[i].geometry.macs()).collect();
    let limit: Vec<u64> = compute.iter().map(|&i| max_parallelism(&graph.layers[i].geometry)).collect();
    let mut m = vec![1u64; compute.len()];
    let foldings = vec![Folding::MINIMAL; graph.layers.len()];
    let costs = graph
        .layers
        .iter()
        .zip(&foldings)
        .map(|(l, &f)| layer_cost(l, f, Arch::Df, platform, coeffs))
        .collect::<Result<Vec<_>, _>>()?;
    let mut state = State { graph, compute, foldings, costs };
    let mut trace = BalanceTrace {
        layers: state.compute.iter().map(|&i| graph.layers[i].layer.clone()).collect(),
        complexity: a.clone(),
        steps: Vec::new(),
        rejected: None,
        fell_back: false,
    };

    if !state.fits(platform, coeffs) {
        trace.fell_back = true;
        trace.rejected = Some(state.step(None, &m, max_ratio(&a, &m), false, platform));
        let design = best_offload_design(graph, platform, coeffs)?;
        return Ok((design, trace));
    }
    trace.steps.push(state.step(None, &m, max_ratio(&a, &m), true, platform));

    loop {
        // Saturated layers cannot grow and are skipped.
        let mut pick: Option<(usize, f64)> = None;
        for (j, (&aj, &mj)) in a.iter().zip(&m).enumerate() {
            if mj >= limit[j] {
                continue;
            }
            let r = aj as f64 / mj as f64;
            if pick.is_none_or(|(_, best)| r > best) {
                pick = Some((j, r));
            }
        }
        let Some((j, _)) = pick else { break };
        let Some(next) = next_divisor(limit[j], m[j]) else { break };
        let li = state.compute[j];
        let layer = &graph.layers[li];
        let folding = tile_layer(next, &layer.geometry);
        let cost = layer_cost(layer, folding, Arch::Df, platform, coeffs)?;
        let (old_f, old_c, old_m) = (state.foldings[li], state.costs[li], m[j]);
        state.foldings[li] = folding;
        state.costs[li] = cost;
        m[j] = next;
        let ok = state.fits(platform, coeffs);
        let step = state.step(Some(layer.layer.clone()), &m, max_ratio(&a, &m), ok, platform);
        if !ok {
            state.foldings[li] = old_f;
            state.costs[li] = old_c;
            m[j] = old_m;
            trace.rejected = Some(step);
            break;
        }
        trace.steps.push(step);
    }

    let design = dataflow_design(graph, &state.foldings, platform, coeffs)?;
    Ok((design, trace))
}
