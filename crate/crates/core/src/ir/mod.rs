//! Quantization-aware intermediate representation.
//!
//! A [`Network`] is a DAG of [`Layer`]s. Every layer carries the precision of
//! the values it emits; the precision of a layer's inputs is the output
//! precision of its producer, so each node is tagged with the quantization of
//! its inputs, parameters and outputs.

mod network;
mod precision;
mod validate;

pub use network::{
    Affine, ConvSpec, FcSpec, Layer, LayerOp, LayerShape, Network, QuantizeSpec, TensorShape,
};
pub use precision::{Precision, PrecisionIssue, ValueKind};
pub use validate::{validate, Diagnostic, Issue};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error("shape mismatch at layer `{layer}`: {reason}")]
    ShapeMismatch { layer: String, reason: String },
    #[error("network has more than one input layer")]
    MultipleInputs,
    #[error("network has no input layer")]
    NoInput,
    #[error("network graph contains a cycle")]
    CycleDetected,
    #[error("layer `{layer}` references unknown input `{input}`")]
    UnknownLayer { layer: String, input: String },
    #[error("duplicate layer id `{0}`")]
    DuplicateId(String),
    #[error("shapes have not been inferred for layer `{0}`")]
    ShapesNotInferred(String),
}

impl IrError {
    pub fn kind(&self) -> &'static str {
        match self {
            IrError::ShapeMismatch { .. } => "ShapeMismatch",
            IrError::MultipleInputs => "MultipleInputs",
            IrError::NoInput => "NoInput",
            IrError::CycleDetected => "CycleDetected",
            IrError::UnknownLayer { .. } => "UnknownLayer",
            IrError::DuplicateId(_) => "DuplicateId",
            IrError::ShapesNotInferred(_) => "ShapesNotInferred",
        }
    }
}

/// Annotates every layer with its input and output shapes.
///
/// Max-pool and concat layers pass precision through, so their output
/// precision is refreshed from their producer at the same time.
pub fn infer_shapes(net: &Network) -> Result<Network, IrError> {
    net.input_index()?;
    let order = net.topo_order()?;
    let mut out = net.clone();
    for idx in order {
        let inputs: Vec<TensorShape> = out.layers[idx]
            .inputs
            .iter()
            .map(|id| {
                let src = out.index_of(id).expect("checked by topo_order");
                out.layers[src].shape.as_ref().expect("producer visited first").output
            })
            .collect();
        let layer = &out.layers[idx];
        let output = layer.op.output_shape(&layer.id, &inputs)?;
        if matches!(layer.op, LayerOp::MaxPool { .. } | LayerOp::Concat { .. }) {
            if let Some(p) = out.input_precision(idx) {
                out.layers[idx].precision = p;
            }
        }
        out.layers[idx].shape = Some(LayerShape { inputs, output });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn conv(kernel: usize, stride: usize, pad: usize, out_channels: usize) -> LayerOp {
        LayerOp::Convolution(ConvSpec {
            kernel,
            stride,
            pad,
            out_channels,
            weight_precision: Precision::binary(),
            weights: None,
        })
    }

    fn single_conv(n: usize, c: usize, op: LayerOp) -> Network {
        let mut net = Network::new("t");
        net.chain("in", LayerOp::Input { shape: TensorShape::square(c, n) }, Precision::unsigned(8))
            .chain("conv", op, Precision::accumulator());
        net
    }

    #[test]
    fn conv_output_width() {
        let net = infer_shapes(&single_conv(32, 3, conv(3, 1, 0, 64))).unwrap();
        assert_eq!(net.layers[1].shape.as_ref().unwrap().output, TensorShape::square(64, 30));
    }

    #[test]
    fn pointwise_conv_keeps_width() {
        let net = infer_shapes(&single_conv(32, 3, conv(1, 1, 0, 3))).unwrap();
        assert_eq!(net.layers[1].shape.as_ref().unwrap().output, TensorShape::square(3, 32));
    }

    #[test]
    fn kernel_larger_than_map_is_rejected() {
        let err = infer_shapes(&single_conv(8, 3, conv(9, 1, 0, 4))).unwrap_err();
        assert_eq!(err.kind(), "ShapeMismatch");
        // Padding makes it fit.
        assert!(infer_shapes(&single_conv(8, 3, conv(9, 1, 1, 4))).is_ok());
    }

    #[test]
    fn maxpool_width() {
        let mut net = single_conv(32, 3, conv(3, 1, 0, 8));
        net.chain("pool", LayerOp::MaxPool { kernel: 2, stride: 2 }, Precision::accumulator());
        let net = infer_shapes(&net).unwrap();
        assert_eq!(net.layers[2].shape.as_ref().unwrap().output, TensorShape::square(8, 15));
    }

    #[test]
    fn multiple_inputs_and_cycles() {
        let mut net = single_conv(8, 1, conv(1, 1, 0, 1));
        net.layers.push(Layer::new(
            "in2",
            LayerOp::Input { shape: TensorShape::square(1, 8) },
            Precision::unsigned(8),
            vec![],
        ));
        assert_eq!(infer_shapes(&net).unwrap_err(), IrError::MultipleInputs);

        let mut net = single_conv(8, 1, conv(1, 1, 0, 1));
        net.chain("c2", conv(1, 1, 0, 1), Precision::accumulator());
        net.layers[1].inputs = vec!["c2".into()];
        assert_eq!(infer_shapes(&net).unwrap_err(), IrError::CycleDetected);
    }

    #[test]
    fn concat_sums_channels() {
        let mut net = single_conv(8, 2, conv(1, 1, 0, 3));
        net.layers.push(Layer::new("c2", conv(1, 1, 0, 5), Precision::accumulator(), vec!["in".into()]));
        net.layers.push(Layer::new(
            "cat",
            LayerOp::Concat { arity: 2 },
            Precision::accumulator(),
            vec!["conv".into(), "c2".into()],
        ));
        let net = infer_shapes(&net).unwrap();
        assert_eq!(net.layers[3].shape.as_ref().unwrap().output, TensorShape::square(8, 8));
    }

    #[test]
    fn idempotent_on_bundled_style_net() {
        let mut net = single_conv(32, 3, conv(3, 1, 0, 16));
        net.chain("pool", LayerOp::MaxPool { kernel: 2, stride: 2 }, Precision::binary());
        let once = infer_shapes(&net).unwrap();
        let twice = infer_shapes(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn unit_stride_widths_exhaustive() {
        for n in 1..=16 {
            for k in 1..=n {
                let net = infer_shapes(&single_conv(n, 1, conv(k, 1, 0, 1))).unwrap();
                assert_eq!(net.layers[1].shape.as_ref().unwrap().output.width, n - k + 1);
            }
        }
    }

    proptest! {
        #[test]
        fn output_width_formula(n in 1usize..40, k in 1usize..8, s in 1usize..4, pad in 0usize..3) {
            prop_assume!(k <= n + 2 * pad);
            let net = infer_shapes(&single_conv(n, 2, conv(k, s, pad, 4))).unwrap();
            let w = net.layers[1].shape.as_ref().unwrap().output.width;
            prop_assert_eq!(w, (n + 2 * pad - k) / s + 1);
            prop_assert!(w >= 1);
        }
    }
}
