//! Parameter blobs: little-endian `f32` values in topological layer order.
//!
//! Per layer the blob holds
//! - convolution: `C'·K·K·C` weights, output channel outermost, input channel innermost
//! - fully connected: `D'·D` weights, row per output
//! - scale: `C` multipliers followed by `C` offsets
//! - quantize: `C·(levels-1)` ascending thresholds, channel outermost

use super::FrontendError;
use crate::ir::{infer_shapes, Affine, LayerOp, Network, QuantizeSpec};

const MAX_LOADABLE_LEVELS: u64 = 1 << 16;

/// Values the blob for one layer must contain.
fn layer_count(net: &Network, idx: usize) -> Result<usize, FrontendError> {
    let layer = &net.layers[idx];
    let c = net.shape_of(idx)?.input().channels;
    Ok(match &layer.op {
        LayerOp::Convolution(conv) => conv.kernel * conv.kernel * c * conv.out_channels,
        LayerOp::FullyConnected(fc) => fc.in_features * fc.out_features,
        LayerOp::Scale(_) => 2 * c,
        LayerOp::Quantize(_) => {
            let levels = layer
                .precision
                .levels()
                .filter(|&l| l <= MAX_LOADABLE_LEVELS)
                .ok_or_else(|| FrontendError::UnsupportedPrecision(layer.id.clone()))?;
            c * (levels as usize - 1)
        }
        _ => 0,
    })
}

/// Number of `f32` values a parameter blob for `net` must hold.
pub fn parameter_count(net: &Network) -> Result<usize, FrontendError> {
    let shaped = infer_shapes(net)?;
    let mut total = 0;
    for idx in shaped.topo_order()? {
        total += layer_count(&shaped, idx)?;
    }
    Ok(total)
}

/// Attaches parameter values to every weighted layer. The result carries
/// inferred shapes.
pub fn load_parameters(net: &Network, values: &[f32]) -> Result<Network, FrontendError> {
    if net.layers.is_empty() {
        if values.is_empty() {
            return Ok(net.clone());
        }
        return Err(FrontendError::SizeMismatch { expected: 0, got: values.len() });
    }
    let mut shaped = infer_shapes(net)?;
    let order = shaped.topo_order()?;
    let mut expected = 0;
    for &idx in &order {
        expected += layer_count(&shaped, idx)?;
    }
    if expected != values.len() {
        return Err(FrontendError::SizeMismatch { expected, got: values.len() });
    }

    let mut cursor = 0;
    for idx in order {
        let n = layer_count(&shaped, idx)?;
        let chunk: Vec<f64> = values[cursor..cursor + n].iter().map(|&v| f64::from(v)).collect();
        cursor += n;
        let c = shaped.shape_of(idx)?.input().channels;
        match &mut shaped.layers[idx].op {
            LayerOp::Convolution(conv) => conv.weights = Some(chunk),
            LayerOp::FullyConnected(fc) => fc.weights = Some(chunk),
            LayerOp::Scale(affine) => {
                let (a, b) = chunk.split_at(c);
                *affine = Some(Affine { a: a.to_vec(), b: b.to_vec() });
            }
            LayerOp::Quantize(q) => {
                let per = n.checked_div(c).unwrap_or(0);
                let thresholds = chunk.chunks(per.max(1)).map(<[f64]>::to_vec).collect();
                *q = QuantizeSpec::with_thresholds(thresholds);
            }
            _ => {}
        }
    }
    Ok(shaped)
}

pub fn read_blob(bytes: &[u8]) -> Result<Vec<f32>, FrontendError> {
    if bytes.len() % 4 != 0 {
        return Err(FrontendError::BlobAlignment(bytes.len()));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect())
}

pub fn write_blob(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}
