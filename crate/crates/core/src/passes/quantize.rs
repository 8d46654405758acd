use super::PassError;
use crate::ir::{Layer, LayerOp, Network, Precision};

pub const DEFAULT_QUANT_BITS: u32 = 8;

/// The weight values of a compute layer whose weights are floating point.
pub(crate) fn float_weights(layer: &Layer) -> Option<&Option<Vec<f64>>> {
    match &layer.op {
        LayerOp::Convolution(c) if c.weight_precision.is_float() => Some(&c.weights),
        LayerOp::FullyConnected(f) if f.weight_precision.is_float() => Some(&f.weights),
        _ => None,
    }
}

/// Fraction bits for a symmetric `bits`-wide fixed-point format: the largest
/// `f` in `0..bits` with `max_abs·2^f ≤ 2^(bits-1) - 1`.
pub(crate) fn fraction_bits(max_abs: f64, bits: u32) -> u32 {
    let limit = ((1i64 << (bits - 1)) - 1) as f64;
    let mut f = bits - 1;
    while f > 0 && max_abs * 2f64.powi(f as i32) > limit {
        f -= 1;
    }
    f
}

fn quantize_block(weights: &[f64], bits: u32) -> (Vec<f64>, Precision) {
    let max_abs = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let f = fraction_bits(max_abs, bits);
    let scale = 2f64.powi(f as i32);
    let lo = -((1i64 << (bits - 1)) as f64);
    let hi = ((1i64 << (bits - 1)) - 1) as f64;
    let values = weights
        .iter()
        .map(|w| (w * scale).round_ties_even().clamp(lo, hi) / scale)
        .collect();
    (values, Precision::fixed(bits - f, f))
}

/// Converts every floating-point weight block to `bits`-wide fixed point.
/// Layers that are already quantized are left alone.
pub fn direct_quantize(net: &Network, bits: u32) -> Result<Network, PassError> {
    if !(2..=32).contains(&bits) {
        return Err(PassError::InvalidBits(bits));
    }
    let mut out = net.clone();
    for layer in &mut out.layers {
        let id = layer.id.clone();
        let (weights, precision) = match &mut layer.op {
            LayerOp::Convolution(c) if c.weight_precision.is_float() => (&mut c.weights, &mut c.weight_precision),
            LayerOp::FullyConnected(f) if f.weight_precision.is_float() => (&mut f.weights, &mut f.weight_precision),
            _ => continue,
        };
        let values = match weights {
            Some(v) if !v.is_empty() => v,
            _ => return Err(PassError::EmptyWeights(id)),
        };
        let (q, p) = quantize_block(values, bits);
        *values = q;
        *precision = p;
    }
    Ok(out)
}
