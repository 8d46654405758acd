//! Moves max-pool layers behind the quantizer that follows them, so the pool
//! compares narrow quantized values instead of wide accumulators.

use super::PassError;
use crate::ir::{infer_shapes, LayerOp, Network};

pub fn reorder_maxpool(net: &Network) -> Result<Network, PassError> {
    reorder_with_diagnostics(net).map(|(n, _)| n)
}

/// `(pool, quantizer)` index pairs eligible for swapping.
fn next_candidate(net: &Network, skip: &[String]) -> Option<(usize, usize)> {
    net.layers.iter().enumerate().find_map(|(p, pool)| {
        if !matches!(pool.op, LayerOp::MaxPool { .. }) || skip.contains(&pool.id) {
            return None;
        }
        let [q] = net.consumers(&pool.id)[..] else { return None };
        let quant = &net.layers[q];
        (matches!(quant.op, LayerOp::Quantize(_)) && quant.inputs == [pool.id.clone()]).then_some((p, q))
    })
}

pub(crate) fn reorder_with_diagnostics(net: &Network) -> Result<(Network, Vec<String>), PassError> {
    let had_shapes = net.layers.iter().all(|l| l.shape.is_some());
    let mut out = net.clone();
    let mut diagnostics = Vec::new();
    let mut done: Vec<String> = Vec::new();

    while let Some((p, q)) = next_candidate(&out, &done) {
        let pool_id = out.layers[p].id.clone();
        let q_id = out.layers[q].id.clone();
        done.push(pool_id.clone());
        let LayerOp::Quantize(spec) = &out.layers[q].op else { unreachable!() };
        if spec.any_descending() {
            diagnostics.push(format!("DescendingQuantizer({q_id}): {pool_id} left in place"));
            continue;
        }
        let source = out.layers[p].inputs.clone();
        for c in out.consumers(&q_id) {
            for inp in &mut out.layers[c].inputs {
                if *inp == q_id {
                    *inp = pool_id.clone();
                }
            }
        }
        out.layers[q].inputs = source;
        out.layers[p].inputs = vec![q_id];
        out.layers[p].precision = out.layers[q].precision;
        out.layers.swap(p, q);
    }

    let out = if had_shapes && !out.layers.is_empty() { infer_shapes(&out)? } else { out };
    Ok((out, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ConvSpec, Precision, QuantizeSpec, TensorShape};

    fn conv_pool_quant(descending: bool) -> Network {
        let mut q = QuantizeSpec::with_thresholds(vec![vec![0.0]]);
        q.descending = vec![descending];
        let mut net = Network::new("r");
        net.chain("in", LayerOp::Input { shape: TensorShape::square(1, 4) }, Precision::binary())
            .chain(
                "conv",
                LayerOp::Convolution(ConvSpec {
                    kernel: 1,
                    stride: 1,
                    pad: 0,
                    out_channels: 1,
                    weight_precision: Precision::binary(),
                    weights: None,
                }),
                Precision::accumulator(),
            )
            .chain("pool", LayerOp::MaxPool { kernel: 2, stride: 2 }, Precision::accumulator())
            .chain("q", LayerOp::Quantize(q), Precision::binary())
            .chain("pool2", LayerOp::MaxPool { kernel: 2, stride: 2 }, Precision::binary());
        net
    }

    #[test]
    fn pool_moves_behind_quantizer() {
        let out = reorder_maxpool(&conv_pool_quant(false)).unwrap();
        let ids: Vec<_> = out.layers.iter().map(|l| l.id.as_str()).collect();
        assert_eq!(ids, ["in", "conv", "q", "pool", "pool2"]);
        assert_eq!(out.layer("q").unwrap().inputs, ["conv"]);
        assert_eq!(out.layer("pool").unwrap().inputs, ["q"]);
        assert_eq!(out.layer("pool2").unwrap().inputs, ["pool"]);
        assert_eq!(out.layer("pool").unwrap().precision, Precision::binary());
    }

    #[test]
    fn descending_blocks_rewrite() {
        let net = conv_pool_quant(true);
        let (out, diags) = reorder_with_diagnostics(&net).unwrap();
        assert_eq!(out, net);
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn no_pool_no_change() {
        let mut net = Network::new("n");
        net.chain("in", LayerOp::Input { shape: TensorShape::flat(3) }, Precision::binary());
        assert_eq!(reorder_maxpool(&net).unwrap(), net);
    }

    #[test]
    fn output_shape_preserved() {
        let net = infer_shapes(&conv_pool_quant(false)).unwrap();
        let out = reorder_maxpool(&net).unwrap();
        let last = |n: &Network| n.layer("pool2").unwrap().shape.clone().unwrap().output;
        assert_eq!(last(&net), last(&out));
    }
}
