//! Execution schedule of the multilayer offload engine.

use serde::Serialize;

use super::folding::clamp_to_layer;
use super::perf::{layer_perf, ops_per_frame, summarize, PerfEstimate};
use super::DseError;
use crate::cost::{Folding, PlatformSpec};
use crate::passes::BlockGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundness {
    Compute,
    Memory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduledLayer {
    pub layer: String,
    /// Engine folding after clamping to this layer's dimensions.
    pub folding: Folding,
    pub compute_cycles: u64,
    pub weight_transfer_cycles: f64,
    pub fm_transfer_cycles: f64,
    pub time_cycles: f64,
    pub bound: Boundness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub engine: Folding,
    pub layers: Vec<ScheduledLayer>,
    pub frame_cycles: f64,
    /// Share of the frame time the engine spends computing.
    pub utilization: f64,
}

/// Runs the layers one after another on a single engine. Weights and feature
/// maps stream from DRAM at peak bandwidth; a layer takes the longer of its
/// compute and transfer times.
pub fn schedule_multilayer_offload(
    graph: &BlockGraph,
    engine: Folding,
    platform: &PlatformSpec,
) -> Result<(Schedule, PerfEstimate), DseError> {
    if engine.p == 0 || engine.q == 0 || engine.m == 0 {
        return Err(DseError::EngineTooSmall(engine));
    }
    let bits_per_cycle = platform.bytes_per_cycle() * 8.0;
    let mut layers = Vec::with_capacity(graph.layers.len());
    let mut perf = Vec::with_capacity(graph.layers.len());
    for l in &graph.layers {
        let g = &l.geometry;
        let f = clamp_to_layer(engine, g);
        let mut lp = layer_perf(&l.layer, g, f);
        let compute = lp.cycles as u64;
        let weight_bits = g.weight_count() * u64::from(g.w.map_or(0, |w| w.bits));
        let fm_bits = (g.c * g.in_pixels) as u64 * u64::from(g.a.bits)
            + (g.c_out * g.out_pixels) as u64 * u64::from(g.out_bits);
        let weight_cycles = weight_bits as f64 / bits_per_cycle;
        let fm_cycles = fm_bits as f64 / bits_per_cycle;
        let transfer = weight_cycles + fm_cycles;
        let time = (compute as f64).max(transfer);
        lp.cycles = time;
        perf.push(lp);
        layers.push(ScheduledLayer {
            layer: l.layer.clone(),
            folding: f,
            compute_cycles: compute,
            weight_transfer_cycles: weight_cycles,
            fm_transfer_cycles: fm_cycles,
            time_cycles: time,
            bound: if compute as f64 >= transfer { Boundness::Compute } else { Boundness::Memory },
        });
    }
    let frame: f64 = layers.iter().map(|l| l.time_cycles).sum();
    let compute: f64 = layers.iter().map(|l| l.compute_cycles as f64).sum();
    let utilization = if frame > 0.0 { compute / frame } else { 0.0 };
    let bottleneck = layers
        .iter()
        .fold(None::<&ScheduledLayer>, |best, l| match best {
            Some(b) if b.time_cycles >= l.time_cycles => Some(b),
            _ => Some(l),
        })
        .map(|l| l.layer.clone());
    let estimate = summarize(perf, frame, bottleneck, ops_per_frame(graph), platform);
    Ok((Schedule { engine, layers, frame_cycles: frame, utilization }, estimate))
}
