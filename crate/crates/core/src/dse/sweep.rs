//! Grid sweeps over platforms, precisions and architectures.

use rayon::prelude::*;
use serde::Serialize;

use super::{balance_dataflow, best_offload_design, AcceleratorDesign, DseError};
use crate::cost::{Arch, CostCoefficients, PlatformSpec};
use crate::ir::{LayerOp, Network, Precision, QuantizeSpec};
use crate::passes::lower_to_blocks;

/// Precision for a bare bit width: one bit is bipolar, wider weights are
/// signed and wider activations unsigned.
pub fn default_precision(bits: u32, weight: bool) -> Precision {
    match (bits, weight) {
        (1, _) => Precision::binary(),
        (b, true) => Precision::signed(b),
        (b, false) => Precision::unsigned(b),
    }
}

/// Copy of `net` with every weight at `w` and every quantizer producing `a`.
/// Parameter values are dropped since they no longer match the precision.
pub fn assign_precision(net: &Network, w: Precision, a: Precision) -> Network {
    let mut out = net.clone();
    for layer in &mut out.layers {
        match &mut layer.op {
            LayerOp::Convolution(c) => {
                c.weight_precision = w;
                c.weights = None;
            }
            LayerOp::FullyConnected(f) => {
                f.weight_precision = w;
                f.weights = None;
            }
            LayerOp::Quantize(q) => {
                *q = QuantizeSpec::default();
                layer.precision = a;
            }
            _ => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCombination {
    pub platform: String,
    pub weight: Precision,
    pub activation: Precision,
    /// Requested architecture. `DF` runs the balancer, which may itself fall
    /// back to an offload design.
    pub arch: Arch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignPoint {
    pub combination: SweepCombination,
    /// Architecture of the resulting design.
    pub arch: Option<Arch>,
    pub luts: Option<f64>,
    pub bram18: Option<u64>,
    pub dsps: Option<u64>,
    pub throughput_gops: Option<f64>,
    pub fps: Option<f64>,
    pub error: Option<String>,
    pub pareto: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub network: String,
    pub points: Vec<DesignPoint>,
    /// Indices into `points` of the non-dominated designs.
    pub frontier: Vec<usize>,
}

/// Non-dominated flags for `(luts, throughput)` pairs: fewer LUTs and more
/// throughput are better.
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(l, t)| {
            !points
                .iter()
                .any(|&(lo, to)| lo <= l && to >= t && (lo < l || to > t))
        })
        .collect()
}

fn evaluate(
    net: &Network,
    combo: &SweepCombination,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<AcceleratorDesign, DseError> {
    let assigned = assign_precision(net, combo.weight, combo.activation);
    let graph = lower_to_blocks(&assigned, combo.arch)?;
    match combo.arch {
        Arch::Df => balance_dataflow(&graph, platform, coeffs),
        Arch::Mo => best_offload_design(&graph, platform, coeffs),
    }
}

/// One design point per `(platform, W/A pair, arch)` combination, evaluated in
/// parallel. Failures are recorded on their point.
pub fn sweep(
    net: &Network,
    platforms: &[PlatformSpec],
    precisions: &[(Precision, Precision)],
    archs: &[Arch],
    coeffs: &CostCoefficients,
) -> SweepResult {
    let mut combos = Vec::new();
    for p in platforms {
        for &(w, a) in precisions {
            for &arch in archs {
                combos.push((p, SweepCombination { platform: p.name.clone(), weight: w, activation: a, arch }));
            }
        }
    }
    let mut points: Vec<DesignPoint> = combos
        .par_iter()
        .map(|(platform, combo)| match evaluate(net, combo, platform, coeffs) {
            Ok(d) => DesignPoint {
                combination: combo.clone(),
                arch: Some(d.arch),
                luts: Some(d.cost.total.luts),
                bram18: Some(d.cost.total.bram18),
                dsps: Some(d.cost.total.dsps),
                throughput_gops: Some(d.perf.throughput_gops),
                fps: Some(d.perf.fps),
                error: None,
                pareto: false,
            },
            Err(e) => DesignPoint {
                combination: combo.clone(),
                arch: None,
                luts: None,
                bram18: None,
                dsps: None,
                throughput_gops: None,
                fps: None,
                error: Some(format!("{}: {e}", e.kind())),
                pareto: false,
            },
        })
        .collect();

    let ok: Vec<usize> = (0..points.len()).filter(|&i| points[i].error.is_none()).collect();
    let pairs: Vec<(f64, f64)> = ok
        .iter()
        .map(|&i| (points[i].luts.unwrap_or_default(), points[i].throughput_gops.unwrap_or_default()))
        .collect();
    let mut frontier = Vec::new();
    for (&i, on) in ok.iter().zip(pareto_front(&pairs)) {
        if on {
            points[i].pareto = true;
            frontier.push(i);
        }
    }
    SweepResult { network: net.name.clone(), points, frontier }
}
