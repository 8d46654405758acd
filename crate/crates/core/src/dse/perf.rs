use serde::Serialize;

use super::DseError;
use crate::cost::{Folding, PlatformSpec};
use crate::passes::{BlockGraph, LayerGeometry, LoweredKind};

/// Relative uncertainty attached to every estimate.
pub const CONFIDENCE: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockBound {
    #[serde(rename = "MVU")]
    Mvu,
    #[serde(rename = "SWU")]
    Swu,
    #[serde(rename = "MP")]
    Mp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

impl Band {
    pub fn around(v: f64) -> Self {
        Self { low: v * (1.0 - CONFIDENCE), high: v * (1.0 + CONFIDENCE) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerPerf {
    pub layer: String,
    pub folding: Folding,
    pub macs: u64,
    pub mvu_cycles: u64,
    pub swu_cycles: u64,
    pub mp_cycles: u64,
    /// Cycles per frame of the layer; for offload designs this includes
    /// memory transfers.
    pub cycles: f64,
    pub bound: BlockBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfEstimate {
    pub clock_mhz: f64,
    pub layers: Vec<LayerPerf>,
    pub bottleneck: Option<String>,
    /// Dataflow: the slowest layer. Offload: the sum over layers.
    pub cycles_per_frame: f64,
    pub fps: f64,
    pub ops_per_frame: u64,
    pub throughput_gops: f64,
    pub throughput_band: Band,
}

/// Cycle counts of the blocks of one layer: `(MVU, SWU, MP)`.
pub fn block_cycles(g: &LayerGeometry, f: Folding) -> (u64, u64, u64) {
    match g.kind {
        LoweredKind::Conv => {
            let mvu = g.macs().div_ceil(f.product());
            let swu = ((g.k * g.k * g.out_pixels) as u64 * (g.c as u64).div_ceil(f.q)).div_ceil(f.m);
            (mvu, swu, 0)
        }
        LoweredKind::Fc => (g.macs().div_ceil(f.product()), 0, 0),
        // The pool's window generator is sized to feed one comparison per
        // cycle, so the comparator sets the pace.
        LoweredKind::Pool => (0, 0, ((g.out_pixels * g.c) as u64).div_ceil(f.m)),
    }
}

pub(crate) fn layer_perf(layer: &str, g: &LayerGeometry, f: Folding) -> LayerPerf {
    let (mvu, swu, mp) = block_cycles(g, f);
    let bound = if mp >= mvu.max(swu) {
        BlockBound::Mp
    } else if swu > mvu {
        BlockBound::Swu
    } else {
        BlockBound::Mvu
    };
    LayerPerf {
        layer: layer.to_string(),
        folding: f,
        macs: g.macs(),
        mvu_cycles: mvu,
        swu_cycles: swu,
        mp_cycles: mp,
        cycles: mvu.max(swu).max(mp) as f64,
        bound,
    }
}

pub(crate) fn ops_per_frame(graph: &BlockGraph) -> u64 {
    2 * graph.layers.iter().map(|l| l.geometry.macs()).sum::<u64>()
}

pub(crate) fn summarize(
    layers: Vec<LayerPerf>,
    frame_cycles: f64,
    bottleneck: Option<String>,
    ops: u64,
    platform: &PlatformSpec,
) -> PerfEstimate {
    let fps = if frame_cycles > 0.0 { platform.clock_hz() / frame_cycles } else { 0.0 };
    let throughput = ops as f64 * fps / 1e9;
    PerfEstimate {
        clock_mhz: platform.clock_mhz,
        layers,
        bottleneck,
        cycles_per_frame: frame_cycles,
        fps,
        ops_per_frame: ops,
        throughput_gops: throughput,
        throughput_band: Band::around(throughput),
    }
}

/// Dataflow performance: every layer runs concurrently, the slowest sets the
/// frame rate.
pub fn estimate_performance(
    graph: &BlockGraph,
    foldings: &[Folding],
    platform: &PlatformSpec,
) -> Result<PerfEstimate, DseError> {
    if foldings.len() != graph.layers.len() {
        return Err(DseError::FoldingCount { expected: graph.layers.len(), found: foldings.len() });
    }
    let layers: Vec<LayerPerf> = graph
        .layers
        .iter()
        .zip(foldings)
        .map(|(l, &f)| layer_perf(&l.layer, &l.geometry, f))
        .collect();
    let slowest = layers
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, l)| match best {
            Some((_, c)) if c >= l.cycles => best,
            _ => Some((i, l.cycles)),
        });
    let frame = slowest.map_or(0.0, |(_, c)| c);
    let bottleneck = slowest.map(|(i, _)| layers[i].layer.clone());
    Ok(summarize(layers, frame, bottleneck, ops_per_frame(graph), platform))
}
