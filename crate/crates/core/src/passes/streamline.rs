//! Folds chains of per-channel affine `Scale` layers into the thresholds of
//! the quantizer that follows them.

use super::PassError;
use crate::ir::{infer_shapes, Affine, LayerOp, Network, QuantizeSpec};

/// Per-channel composite `a·x + b` of a chain, earliest scale first.
fn compose(chain: &[&Affine], channels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![1.0; channels];
    let mut b = vec![0.0; channels];
    for affine in chain {
        for c in 0..channels {
            let sa = affine.a[c.min(affine.a.len() - 1)];
            let sb = affine.b[c.min(affine.b.len() - 1)];
            a[c] *= sa;
            b[c] = sa * b[c] + sb;
        }
    }
    (a, b)
}

/// Scale layers feeding `q_idx` through single-consumer links, earliest first.
fn scale_chain(net: &Network, q_idx: usize) -> Vec<usize> {
    let mut chain = Vec::new();
    let mut cur = q_idx;
    loop {
        let layer = &net.layers[cur];
        let [src] = layer.inputs.as_slice() else { break };
        let Some(src_idx) = net.index_of(src) else { break };
        if !matches!(net.layers[src_idx].op, LayerOp::Scale(_)) || net.consumers(src).len() != 1 {
            break;
        }
        chain.push(src_idx);
        cur = src_idx;
    }
    chain.reverse();
    chain
}

/// Absorbs scale chains into the following quantizer's thresholds.
pub fn streamline(net: &Network) -> Result<Network, PassError> {
    streamline_with_diagnostics(net).map(|(n, _)| n)
}

pub(crate) fn streamline_with_diagnostics(net: &Network) -> Result<(Network, Vec<String>), PassError> {
    let mut out = infer_shapes(net)?;
    let mut diagnostics = Vec::new();
    let mut absorbed: Vec<String> = Vec::new();

    for q_idx in out.topo_order()? {
        if !matches!(out.layers[q_idx].op, LayerOp::Quantize(_)) {
            continue;
        }
        let chain = scale_chain(&out, q_idx);
        if chain.is_empty() {
            continue;
        }
        let channels = out.shape_of(q_idx)?.output.channels;
        let LayerOp::Quantize(q) = &out.layers[q_idx].op else { unreachable!() };

        if q.thresholds.is_some() {
            let mut affines = Vec::with_capacity(chain.len());
            for &s in &chain {
                match &out.layers[s].op {
                    LayerOp::Scale(Some(a)) => affines.push(a),
                    _ => return Err(PassError::MissingParameters(out.layers[s].id.clone())),
                }
            }
            for (&s, affine) in chain.iter().zip(&affines) {
                if let Some(channel) = affine.a.iter().position(|&v| v == 0.0) {
                    return Err(PassError::ZeroScale { layer: out.layers[s].id.clone(), channel });
                }
            }
            let (a, b) = compose(&affines, channels);
            let mut thresholds = Vec::with_capacity(channels);
            let mut descending = Vec::with_capacity(channels);
            for c in 0..channels {
                let tau = q.channel_thresholds(c).unwrap_or(&[]);
                let mut moved: Vec<f64> = tau.iter().map(|t| (t - b[c]) / a[c]).collect();
                if a[c] < 0.0 {
                    moved.reverse();
                }
                thresholds.push(moved);
                descending.push(q.is_descending(c) != (a[c] < 0.0));
            }
            out.layers[q_idx].op = LayerOp::Quantize(QuantizeSpec { thresholds: Some(thresholds), descending });
        }
        // Without thresholds only the structure changes.
        absorbed.extend(chain.iter().map(|&s| out.layers[s].id.clone()));
    }

    for id in &absorbed {
        out.bypass(id);
    }
    for layer in &out.layers {
        if matches!(layer.op, LayerOp::Scale(_)) {
            diagnostics.push(format!("DanglingScale({})", layer.id));
        }
    }
    let out = infer_shapes(&out)?;
    Ok((out, diagnostics))
}
