//! Functional reference executor. Evaluates a parameterised network value by
//! value, with convolutions lowered through an interleaved im2col.

mod mvtu;
mod tensor;

use thiserror::Error;

use crate::ir::{infer_shapes, IrError, LayerOp, Network, TensorShape};

pub use mvtu::{matmul, mvtu, xnor_popcount_dot};
pub use tensor::{im2col_interleaved, Matrix, Tensor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RefExecError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("layer `{0}` has no parameter values")]
    MissingParameters(String),
    #[error("input value {value} is not representable as {precision}")]
    InvalidInput { value: f64, precision: String },
    #[error("accumulator overflow")]
    Overflow,
    #[error(transparent)]
    Ir(#[from] IrError),
}

impl RefExecError {
    pub fn kind(&self) -> &'static str {
        match self {
            RefExecError::ShapeMismatch(_) => "ShapeMismatch",
            RefExecError::DimensionMismatch(_) => "DimensionMismatch",
            RefExecError::MissingParameters(_) => "MissingParameters",
            RefExecError::InvalidInput { .. } => "InvalidInput",
            RefExecError::Overflow => "Overflow",
            RefExecError::Ir(e) => e.kind(),
        }
    }
}

fn broadcast(v: &[f64], c: usize) -> f64 {
    if v.len() == 1 { v[0] } else { v[c] }
}

fn max_pool(input: &Tensor, k: usize, s: usize) -> Tensor {
    let TensorShape { channels, height, width } = input.shape;
    let shape = TensorShape { channels, height: (height - k) / s + 1, width: (width - k) / s + 1 };
    let mut out = Tensor::zeros(shape);
    for oy in 0..shape.height {
        for ox in 0..shape.width {
            for c in 0..channels {
                let mut m = f64::NEG_INFINITY;
                for ky in 0..k {
                    for kx in 0..k {
                        m = m.max(input.get(c, oy * s + ky, ox * s + kx));
                    }
                }
                let i = out.index(c, oy, ox);
                out.data[i] = m;
            }
        }
    }
    out
}

/// Evaluates every layer and returns all intermediate tensors in
/// topological order.
pub fn execute_layers(net: &Network, input: &Tensor) -> Result<Vec<(String, Tensor)>, RefExecError> {
    let net = infer_shapes(net)?;
    let order = net.topo_order()?;
    let mut values: Vec<Option<Tensor>> = vec![None; net.layers.len()];
    let mut trace = Vec::with_capacity(order.len());
    for idx in order {
        let layer = &net.layers[idx];
        let shape = net.shape_of(idx)?;
        let inputs: Vec<&Tensor> = layer
            .inputs
            .iter()
            .map(|id| net.index_of(id).and_then(|i| values[i].as_ref()).expect("topological order"))
            .collect();
        let missing = || RefExecError::MissingParameters(layer.id.clone());
        let out = match &layer.op {
            LayerOp::Input { shape } => {
                if input.shape != *shape {
                    return Err(RefExecError::ShapeMismatch(format!(
                        "network expects a {}x{}x{} input, got {}x{}x{}",
                        shape.channels, shape.height, shape.width, input.shape.channels, input.shape.height, input.shape.width
                    )));
                }
                if let Some(&bad) = input.data.iter().find(|&&v| !layer.precision.represents(v)) {
                    return Err(RefExecError::InvalidInput { value: bad, precision: layer.precision.to_string() });
                }
                input.clone()
            }
            LayerOp::Convolution(conv) => {
                let w = conv.weights.as_ref().ok_or_else(missing)?;
                let rows = im2col_interleaved(inputs[0], conv.kernel, conv.stride, conv.pad)?;
                let weights = Matrix::new(conv.out_channels, rows.cols, w.clone())?;
                Tensor::new(shape.output, matmul(&rows, &weights)?.data)?
            }
            LayerOp::FullyConnected(fc) => {
                let w = fc.weights.as_ref().ok_or_else(missing)?;
                let rows = Matrix::new(1, fc.in_features, inputs[0].data.clone())?;
                let weights = Matrix::new(fc.out_features, fc.in_features, w.clone())?;
                Tensor::new(shape.output, matmul(&rows, &weights)?.data)?
            }
            LayerOp::MaxPool { kernel, stride } => max_pool(inputs[0], *kernel, *stride),
            LayerOp::Scale(affine) => {
                let affine = affine.as_ref().ok_or_else(missing)?;
                let c = inputs[0].shape.channels;
                let mut out = inputs[0].clone();
                for (i, v) in out.data.iter_mut().enumerate() {
                    let ch = i % c;
                    *v = broadcast(&affine.a, ch) * *v + broadcast(&affine.b, ch);
                }
                out
            }
            LayerOp::Quantize(q) => {
                if q.thresholds.is_none() {
                    return Err(missing());
                }
                let c = inputs[0].shape.channels;
                let mut out = inputs[0].clone();
                for (i, v) in out.data.iter_mut().enumerate() {
                    *v = layer.precision.level_value(q.level(i % c, *v));
                }
                out
            }
            LayerOp::Concat { .. } => {
                let mut out = Tensor::zeros(shape.output);
                let mut offset = 0;
                for t in &inputs {
                    for y in 0..t.shape.height {
                        for x in 0..t.shape.width {
                            for c in 0..t.shape.channels {
                                let i = out.index(offset + c, y, x);
                                out.data[i] = t.get(c, y, x);
                            }
                        }
                    }
                    offset += t.shape.channels;
                }
                out
            }
        };
        trace.push((layer.id.clone(), out.clone()));
        values[idx] = Some(out);
    }
    Ok(trace)
}

/// Output of the network's last layer in topological order.
pub fn execute(net: &Network, input: &Tensor) -> Result<Tensor, RefExecError> {
    let mut trace = execute_layers(net, input)?;
    trace.pop().map(|(_, t)| t).ok_or(RefExecError::Ir(IrError::NoInput))
}
