use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{IrError, Precision};

/// Feature-map geometry. Flat vectors use `height = width = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl TensorShape {
    /// Square feature map.
    pub const fn square(channels: usize, width: usize) -> Self {
        Self { channels, height: width, width }
    }

    pub const fn flat(len: usize) -> Self {
        Self { channels: len, height: 1, width: 1 }
    }

    pub fn elements(&self) -> usize {
        self.channels * self.height * self.width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvSpec {
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    pub out_channels: usize,
    pub weight_precision: Precision,
    /// `out_channels x kernel x kernel x in_channels`, channel innermost.
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcSpec {
    pub in_features: usize,
    pub out_features: usize,
    pub weight_precision: Precision,
    /// `out_features x in_features`, row-major.
    pub weights: Option<Vec<f64>>,
}

/// Per-channel affine map `a * x + b` (batch norm after folding).
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Multi-level thresholding.
///
/// Each channel's thresholds are strictly increasing. An ascending channel
/// outputs the number of thresholds `t` with `x >= t`, a descending channel
/// the number with `x <= t`. A single threshold list is broadcast to all
/// channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantizeSpec {
    pub thresholds: Option<Vec<Vec<f64>>>,
    pub descending: Vec<bool>,
}

impl QuantizeSpec {
    pub fn with_thresholds(thresholds: Vec<Vec<f64>>) -> Self {
        let descending = vec![false; thresholds.len()];
        Self { thresholds: Some(thresholds), descending }
    }

    pub fn is_descending(&self, channel: usize) -> bool {
        match self.descending.len() {
            0 => false,
            1 => self.descending[0],
            _ => self.descending.get(channel).copied().unwrap_or(false),
        }
    }

    pub fn any_descending(&self) -> bool {
        self.descending.iter().any(|&d| d)
    }

    pub fn channel_thresholds(&self, channel: usize) -> Option<&[f64]> {
        let t = self.thresholds.as_ref()?;
        if t.len() == 1 {
            Some(&t[0])
        } else {
            t.get(channel).map(|v| v.as_slice())
        }
    }

    /// Output level of a single channel for value `x`.
    pub fn level(&self, channel: usize, x: f64) -> u32 {
        let t = self.channel_thresholds(channel).unwrap_or(&[]);
        if self.is_descending(channel) {
            t.iter().filter(|&&tau| x <= tau).count() as u32
        } else {
            t.iter().filter(|&&tau| x >= tau).count() as u32
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerOp {
    Input { shape: TensorShape },
    Convolution(ConvSpec),
    FullyConnected(FcSpec),
    MaxPool { kernel: usize, stride: usize },
    Scale(Option<Affine>),
    Quantize(QuantizeSpec),
    Concat { arity: usize },
}

impl LayerOp {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerOp::Input { .. } => "input",
            LayerOp::Convolution(_) => "conv",
            LayerOp::FullyConnected(_) => "fc",
            LayerOp::MaxPool { .. } => "maxpool",
            LayerOp::Scale(_) => "scale",
            LayerOp::Quantize(_) => "quantize",
            LayerOp::Concat { .. } => "concat",
        }
    }

    pub fn is_compute(&self) -> bool {
        matches!(self, LayerOp::Convolution(_) | LayerOp::FullyConnected(_))
    }

    fn expected_inputs(&self) -> Option<usize> {
        match self {
            LayerOp::Input { .. } => Some(0),
            LayerOp::Concat { arity } => Some(*arity),
            _ => Some(1),
        }
    }

    /// Output shape given the shapes of all inputs.
    pub fn output_shape(&self, id: &str, inputs: &[TensorShape]) -> Result<TensorShape, IrError> {
        let mismatch = |reason: String| IrError::ShapeMismatch { layer: id.to_string(), reason };
        if let Some(n) = self.expected_inputs() {
            if inputs.len() != n {
                return Err(mismatch(format!("expected {n} input(s), found {}", inputs.len())));
            }
        }
        match self {
            LayerOp::Input { shape } => {
                if shape.channels == 0 || shape.height == 0 || shape.width == 0 {
                    return Err(mismatch("input dimensions must be positive".into()));
                }
                Ok(*shape)
            }
            LayerOp::Convolution(conv) => {
                let inp = inputs[0];
                if conv.kernel == 0 || conv.stride == 0 || conv.out_channels == 0 {
                    return Err(mismatch("kernel, stride and output channels must be positive".into()));
                }
                let padded_w = inp.width + 2 * conv.pad;
                let padded_h = inp.height + 2 * conv.pad;
                if conv.kernel > padded_w || conv.kernel > padded_h {
                    return Err(mismatch(format!(
                        "kernel {} exceeds padded map {}x{}",
                        conv.kernel, padded_h, padded_w
                    )));
                }
                Ok(TensorShape {
                    channels: conv.out_channels,
                    height: (padded_h - conv.kernel) / conv.stride + 1,
                    width: (padded_w - conv.kernel) / conv.stride + 1,
                })
            }
            LayerOp::FullyConnected(fc) => {
                let n = inputs[0].elements();
                if fc.in_features != n {
                    return Err(mismatch(format!(
                        "fully connected layer expects {} inputs, upstream provides {n}",
                        fc.in_features
                    )));
                }
                if fc.out_features == 0 {
                    return Err(mismatch("output size must be positive".into()));
                }
                Ok(TensorShape::flat(fc.out_features))
            }
            LayerOp::MaxPool { kernel, stride } => {
                let inp = inputs[0];
                if *kernel == 0 || *stride == 0 {
                    return Err(mismatch("kernel and stride must be positive".into()));
                }
                if *kernel > inp.width || *kernel > inp.height {
                    return Err(mismatch(format!(
                        "pool window {kernel} exceeds map {}x{}",
                        inp.height, inp.width
                    )));
                }
                Ok(TensorShape {
                    channels: inp.channels,
                    height: (inp.height - kernel) / stride + 1,
                    width: (inp.width - kernel) / stride + 1,
                })
            }
            LayerOp::Scale(_) | LayerOp::Quantize(_) => Ok(inputs[0]),
            LayerOp::Concat { .. } => {
                let first = inputs
                    .first()
                    .ok_or_else(|| mismatch("concat needs at least one input".into()))?;
                if inputs.iter().any(|s| s.height != first.height || s.width != first.width) {
                    return Err(mismatch("concat inputs differ in spatial size".into()));
                }
                Ok(TensorShape {
                    channels: inputs.iter().map(|s| s.channels).sum(),
                    ..*first
                })
            }
        }
    }
}

/// Shapes attached by [`infer_shapes`](super::infer_shapes).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerShape {
    pub inputs: Vec<TensorShape>,
    pub output: TensorShape,
}

impl LayerShape {
    pub fn input(&self) -> TensorShape {
        self.inputs.first().copied().unwrap_or(self.output)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub id: String,
    pub op: LayerOp,
    /// Precision of the values this layer emits.
    pub precision: Precision,
    /// Ids of the producing layers, in order.
    pub inputs: Vec<String>,
    pub shape: Option<LayerShape>,
}

impl Layer {
    pub fn new(id: impl Into<String>, op: LayerOp, precision: Precision, inputs: Vec<String>) -> Self {
        Self { id: id.into(), op, precision, inputs, shape: None }
    }
}

/// A quantized neural network as a DAG of layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub name: String,
    pub layers: Vec<Layer>,
}

impl Network {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), layers: Vec::new() }
    }

    /// Appends a layer fed by the previously appended layer.
    pub fn chain(&mut self, id: impl Into<String>, op: LayerOp, precision: Precision) -> &mut Self {
        let inputs = match (&op, self.layers.last()) {
            (LayerOp::Input { .. }, _) | (_, None) => Vec::new(),
            (_, Some(prev)) => vec![prev.id.clone()],
        };
        self.layers.push(Layer::new(id, op, precision, inputs));
        self
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.id == id)
    }

    pub fn layer(&self, id: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.id == id)
    }

    pub fn layer_mut(&mut self, id: &str) -> Option<&mut Layer> {
        self.layers.iter_mut().find(|l| l.id == id)
    }

    /// Indices of layers consuming `id`'s output.
    pub fn consumers(&self, id: &str) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| l.inputs.iter().any(|i| i == id))
            .map(|(i, _)| i)
            .collect()
    }

    /// Layers nobody consumes.
    pub fn outputs(&self) -> Vec<usize> {
        (0..self.layers.len())
            .filter(|&i| self.consumers(&self.layers[i].id).is_empty())
            .collect()
    }

    pub fn input_index(&self) -> Result<usize, IrError> {
        let mut found = self
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l.op, LayerOp::Input { .. }))
            .map(|(i, _)| i);
        match (found.next(), found.next()) {
            (Some(i), None) => Ok(i),
            (None, _) => Err(IrError::NoInput),
            (Some(_), Some(_)) => Err(IrError::MultipleInputs),
        }
    }

    /// Precision of the values entering layer `idx` (its first input).
    pub fn input_precision(&self, idx: usize) -> Option<Precision> {
        let first = self.layers[idx].inputs.first()?;
        self.layer(first).map(|l| l.precision)
    }

    /// Topological order, stable with respect to the stored layer order.
    pub fn topo_order(&self) -> Result<Vec<usize>, IrError> {
        let mut index: HashMap<&str, usize> = HashMap::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            if index.insert(l.id.as_str(), i).is_some() {
                return Err(IrError::DuplicateId(l.id.clone()));
            }
        }
        let mut indegree = vec![0usize; self.layers.len()];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); self.layers.len()];
        for (i, l) in self.layers.iter().enumerate() {
            for inp in &l.inputs {
                let &src = index.get(inp.as_str()).ok_or_else(|| IrError::UnknownLayer {
                    layer: l.id.clone(),
                    input: inp.clone(),
                })?;
                indegree[i] += 1;
                succ[src].push(i);
            }
        }
        let mut order = Vec::with_capacity(self.layers.len());
        let mut ready: std::collections::BTreeSet<usize> =
            (0..self.layers.len()).filter(|&i| indegree[i] == 0).collect();
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &s in &succ[i] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        if order.len() != self.layers.len() {
            return Err(IrError::CycleDetected);
        }
        Ok(order)
    }

    /// Layer shapes, requiring a prior [`infer_shapes`](super::infer_shapes).
    pub fn shape_of(&self, idx: usize) -> Result<&LayerShape, IrError> {
        self.layers[idx]
            .shape
            .as_ref()
            .ok_or_else(|| IrError::ShapesNotInferred(self.layers[idx].id.clone()))
    }

    /// Removes layer `id`, rewiring its consumers to its (single) input.
    pub fn bypass(&mut self, id: &str) {
        let Some(idx) = self.index_of(id) else { return };
        let replacement = self.layers[idx].inputs.first().cloned();
        self.layers.remove(idx);
        for l in &mut self.layers {
            for inp in &mut l.inputs {
                if inp == id {
                    if let Some(r) = &replacement {
                        *inp = r.clone();
                    }
                }
            }
        }
    }
}
