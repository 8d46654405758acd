//! Decomposition of layers into hardware building blocks.

use serde::Serialize;

use super::PassError;
use crate::cost::Arch;
use crate::ir::{infer_shapes, LayerOp, Network, Precision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    /// Sliding window unit (line buffer).
    #[serde(rename = "SWU")]
    Swu,
    /// Matrix-vector unit.
    #[serde(rename = "MVU")]
    Mvu,
    /// Weight memory.
    #[serde(rename = "WM")]
    Wm,
    /// Threshold memory.
    #[serde(rename = "TM")]
    Tm,
    /// Max-pool comparator.
    #[serde(rename = "MP")]
    Mp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LoweredKind {
    Conv,
    Fc,
    Pool,
}

/// Everything the cost and performance models need to know about a layer.
/// Fully connected layers are described as a 1×1 convolution over a single
/// pixel, with `c = D` and `c_out = D'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerGeometry {
    pub kind: LoweredKind,
    pub k: usize,
    pub s: usize,
    /// Input width including padding.
    pub n: usize,
    pub c: usize,
    pub c_out: usize,
    /// Output rows, `N'`.
    pub rows_out: usize,
    /// Output pixels per channel, `N'·N'` for square maps.
    pub out_pixels: usize,
    /// Input pixels per channel, without padding.
    pub in_pixels: usize,
    pub w: Option<Precision>,
    /// Precision of the activations entering the layer.
    pub a: Precision,
    /// Precision produced by the thresholds behind the layer, if any.
    pub a_out: Option<Precision>,
    /// Width of the values the layer writes out.
    pub out_bits: u32,
}

impl LayerGeometry {
    pub fn weight_count(&self) -> u64 {
        match self.kind {
            LoweredKind::Pool => 0,
            _ => (self.k * self.k * self.c * self.c_out) as u64,
        }
    }

    /// Multiply-accumulates per frame.
    pub fn macs(&self) -> u64 {
        self.weight_count() * self.out_pixels as u64
    }

    /// Threshold count held by the TM: one set per output channel.
    pub fn threshold_count(&self) -> u64 {
        match (self.kind, self.a_out.and_then(|p| p.levels())) {
            (LoweredKind::Pool, _) | (_, None) => 0,
            (_, Some(levels)) => self.c_out as u64 * (levels - 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoweredLayer {
    pub layer: String,
    pub geometry: LayerGeometry,
    pub blocks: Vec<BlockKind>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockGraph {
    pub network: String,
    pub arch: Arch,
    pub layers: Vec<LoweredLayer>,
}

impl BlockGraph {
    pub fn block_count(&self) -> usize {
        self.layers.iter().map(|l| l.blocks.len()).sum()
    }

    pub fn warnings(&self) -> Vec<String> {
        self.layers.iter().flat_map(|l| l.warnings.iter().cloned()).collect()
    }

    pub fn layer(&self, id: &str) -> Option<&LoweredLayer> {
        self.layers.iter().find(|l| l.layer == id)
    }
}

/// Thresholds wider than this are costed but flagged.
const THRESHOLD_BITS_LIMIT: u32 = 4;

pub fn lower_to_blocks(net: &Network, arch: Arch) -> Result<BlockGraph, PassError> {
    let shaped = infer_shapes(net)?;
    let mut layers = Vec::new();
    for idx in shaped.topo_order()? {
        let layer = &shaped.layers[idx];
        if let LayerOp::Scale(_) = layer.op {
            let feeds_quantizer = shaped
                .consumers(&layer.id)
                .iter()
                .any(|&c| matches!(shaped.layers[c].op, LayerOp::Quantize(_)));
            if feeds_quantizer {
                return Err(PassError::UnstreamlinedScale(layer.id.clone()));
            }
            continue;
        }
        let shape = shaped.shape_of(idx)?;
        let input = shape.input();
        let output = shape.output;
        let a = shaped.input_precision(idx).unwrap_or(layer.precision);
        let consumers = shaped.consumers(&layer.id);
        let a_out = match consumers[..] {
            [c] => match shaped.layers[c].op {
                LayerOp::Quantize(_) => Some(shaped.layers[c].precision),
                _ => None,
            },
            _ => None,
        };
        let out_bits = a_out.map_or(layer.precision.bits, |p| p.bits);
        let (geometry, blocks) = match &layer.op {
            LayerOp::Convolution(conv) => (
                LayerGeometry {
                    kind: LoweredKind::Conv,
                    k: conv.kernel,
                    s: conv.stride,
                    n: input.width + 2 * conv.pad,
                    c: input.channels,
                    c_out: conv.out_channels,
                    rows_out: output.height,
                    out_pixels: output.height * output.width,
                    in_pixels: input.height * input.width,
                    w: Some(conv.weight_precision),
                    a,
                    a_out,
                    out_bits,
                },
                vec![BlockKind::Swu, BlockKind::Wm, BlockKind::Tm, BlockKind::Mvu],
            ),
            LayerOp::FullyConnected(fc) => (
                LayerGeometry {
                    kind: LoweredKind::Fc,
                    k: 1,
                    s: 1,
                    n: 1,
                    c: fc.in_features,
                    c_out: fc.out_features,
                    rows_out: 1,
                    out_pixels: 1,
                    in_pixels: 1,
                    w: Some(fc.weight_precision),
                    a,
                    a_out,
                    out_bits,
                },
                vec![BlockKind::Wm, BlockKind::Tm, BlockKind::Mvu],
            ),
            LayerOp::MaxPool { kernel, stride } => (
                LayerGeometry {
                    kind: LoweredKind::Pool,
                    k: *kernel,
                    s: *stride,
                    n: input.width,
                    c: input.channels,
                    c_out: input.channels,
                    rows_out: output.height,
                    out_pixels: output.height * output.width,
                    in_pixels: input.height * input.width,
                    w: None,
                    a,
                    a_out: None,
                    out_bits: a.bits,
                },
                vec![BlockKind::Swu, BlockKind::Mp],
            ),
            _ => continue,
        };
        let mut warnings = Vec::new();
        if let Some(p) = geometry.a_out.filter(|_| geometry.kind != LoweredKind::Pool) {
            if p.bits > THRESHOLD_BITS_LIMIT {
                warnings.push(format!("ThresholdingInfeasible({}): {}-bit thresholds", layer.id, p.bits));
            }
        }
        layers.push(LoweredLayer { layer: layer.id.clone(), geometry, blocks, warnings });
    }
    Ok(BlockGraph { network: net.name.clone(), arch, layers })
}
