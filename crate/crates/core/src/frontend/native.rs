//! The native topology format: a JSON document with `name`, `input` and an
//! ordered `layers` array.
//!
//! ```json
//! {
//!   "name": "tiny",
//!   "input": { "c": 1, "h": 4, "w": 4, "bits": 8, "kind": "uint" },
//!   "layers": [
//!     { "type": "conv", "k": 3, "out": 4, "w_bits": 1, "a_bits": 1 },
//!     { "type": "maxpool", "k": 2, "s": 2 },
//!     { "type": "fc", "out": 10, "w_bits": 1 }
//!   ]
//! }
//! ```
//!
//! A `conv` or `fc` entry that declares `a_bits` is followed by an implicit
//! `quantize` layer with id `<id>_act`. Layers are chained in document order
//! unless an explicit `inputs` list is given.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{resolve_fc_inputs, FrontendError};
use crate::ir::{
    Affine, ConvSpec, FcSpec, Layer, LayerOp, Network, Precision, QuantizeSpec, TensorShape, ValueKind,
};

const KNOWN_TYPES: &[&str] = &["conv", "fc", "maxpool", "scale", "quantize", "concat"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    name: String,
    input: InputDecl,
    layers: Vec<LayerDecl>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    c: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<usize>,
    w: usize,
    bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frac: Option<u32>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDecl {
    #[serde(rename = "type")]
    ty: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pad: Option<usize>,
    #[serde(default, rename = "in", skip_serializing_if = "Option::is_none")]
    in_features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_frac: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_frac: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    acc_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    acc_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thresholds: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    descending: Option<Vec<bool>>,
}

/// Which default a missing `*_kind` falls back to.
#[derive(Clone, Copy)]
pub(crate) enum Role {
    Weight,
    Activation,
}

pub(crate) fn precision_from(
    bits: u32,
    kind: Option<&str>,
    frac: Option<u32>,
    role: Role,
    layer: &str,
) -> Result<Precision, FrontendError> {
    let kind = match kind {
        Some(k) => k.to_ascii_lowercase(),
        None => match (bits, role) {
            (1, _) => "binary".into(),
            (_, Role::Weight) => "int".into(),
            (_, Role::Activation) => "uint".into(),
        },
    };
    let p = match kind.as_str() {
        "uint" | "unsigned" => Precision::unsigned(bits),
        "int" | "signed" => Precision::signed(bits),
        "binary" | "bipolar" => Precision { bits, kind: ValueKind::Binary },
        "ternary" => Precision { bits, kind: ValueKind::Ternary },
        "float" | "fp" => Precision::float(bits),
        "fixed" => {
            let frac = frac.ok_or_else(|| FrontendError::MissingPrecision(layer.to_string()))?;
            if frac > bits {
                return Err(FrontendError::InvalidField {
                    layer: layer.to_string(),
                    reason: format!("fraction bits {frac} exceed width {bits}"),
                });
            }
            Precision::fixed(bits - frac, frac)
        }
        other => {
            return Err(FrontendError::InvalidField {
                layer: layer.to_string(),
                reason: format!("unknown value kind `{other}`"),
            })
        }
    };
    Ok(p)
}

fn kind_name(p: &Precision) -> (&'static str, Option<u32>) {
    match p.kind {
        ValueKind::UnsignedInt => ("uint", None),
        ValueKind::SignedInt => ("int", None),
        ValueKind::Binary => ("binary", None),
        ValueKind::Ternary => ("ternary", None),
        ValueKind::FixedPoint { frac_bits, .. } => ("fixed", Some(frac_bits)),
        ValueKind::Float => ("float", None),
    }
}

fn syntax(err: serde_json::Error) -> FrontendError {
    FrontendError::SyntaxError { line: err.line(), reason: err.to_string() }
}

fn require<T>(v: Option<T>, layer: &str, field: &str) -> Result<T, FrontendError> {
    v.ok_or_else(|| FrontendError::InvalidField {
        layer: layer.to_string(),
        reason: format!("missing field `{field}`"),
    })
}

/// Parses a native topology document.
pub fn parse_native(text: &str) -> Result<Network, FrontendError> {
    let raw: Value = serde_json::from_str(text).map_err(syntax)?;
    if let Some(layers) = raw.get("layers").and_then(Value::as_array) {
        for l in layers {
            match l.get("type").and_then(Value::as_str) {
                Some(t) if KNOWN_TYPES.contains(&t) => {}
                Some(t) => return Err(FrontendError::UnsupportedLayerKind(t.to_string())),
                None => {
                    return Err(FrontendError::SyntaxError {
                        line: 0,
                        reason: "layer entry without `type`".into(),
                    })
                }
            }
        }
    }
    let doc: Doc = serde_json::from_value(raw).map_err(|e| FrontendError::SyntaxError {
        line: 0,
        reason: e.to_string(),
    })?;
    build(doc)
}

fn build(doc: Doc) -> Result<Network, FrontendError> {
    let mut net = Network::new(doc.name);
    let input_id = doc.input.id.clone().unwrap_or_else(|| "input".to_string());
    let input_precision = precision_from(
        doc.input.bits,
        doc.input.kind.as_deref(),
        doc.input.frac,
        Role::Activation,
        &input_id,
    )?;
    let shape = TensorShape {
        channels: doc.input.c,
        height: doc.input.h.unwrap_or(doc.input.w),
        width: doc.input.w,
    };
    net.layers.push(Layer::new(input_id, LayerOp::Input { shape }, input_precision, vec![]));

    for (i, decl) in doc.layers.into_iter().enumerate() {
        let id = decl.id.clone().unwrap_or_else(|| format!("{}{}", decl.ty, i));
        let inputs = match &decl.inputs {
            Some(list) => list.clone(),
            None => vec![net.layers.last().expect("input pushed").id.clone()],
        };
        let accumulator = match decl.acc_bits {
            Some(bits) => precision_from(bits, decl.acc_kind.as_deref().or(Some("int")), None, Role::Weight, &id)?,
            None => Precision::accumulator(),
        };
        let weight_precision = |d: &LayerDecl| -> Result<Precision, FrontendError> {
            let bits = d.w_bits.ok_or_else(|| FrontendError::MissingPrecision(id.clone()))?;
            precision_from(bits, d.w_kind.as_deref(), d.w_frac, Role::Weight, &id)
        };
        let activation = |d: &LayerDecl| -> Result<Option<Precision>, FrontendError> {
            d.a_bits
                .map(|bits| precision_from(bits, d.a_kind.as_deref(), d.a_frac, Role::Activation, &id))
                .transpose()
        };

        let (op, precision, act) = match decl.ty.as_str() {
            "conv" => {
                let op = LayerOp::Convolution(ConvSpec {
                    kernel: require(decl.k, &id, "k")?,
                    stride: decl.s.unwrap_or(1),
                    pad: decl.pad.unwrap_or(0),
                    out_channels: require(decl.out, &id, "out")?,
                    weight_precision: weight_precision(&decl)?,
                    weights: decl.weights.clone(),
                });
                (op, accumulator, activation(&decl)?)
            }
            "fc" => {
                let op = LayerOp::FullyConnected(FcSpec {
                    in_features: decl.in_features.unwrap_or(0),
                    out_features: require(decl.out, &id, "out")?,
                    weight_precision: weight_precision(&decl)?,
                    weights: decl.weights.clone(),
                });
                (op, accumulator, activation(&decl)?)
            }
            "maxpool" => {
                let k = require(decl.k, &id, "k")?;
                let op = LayerOp::MaxPool { kernel: k, stride: decl.s.unwrap_or(k) };
                // Refreshed from the producer during shape inference.
                (op, accumulator, None)
            }
            "scale" => {
                let affine = match (decl.a.clone(), decl.b.clone()) {
                    (Some(a), Some(b)) => Some(Affine { a, b }),
                    (None, None) => None,
                    _ => {
                        return Err(FrontendError::InvalidField {
                            layer: id,
                            reason: "scale needs both `a` and `b` or neither".into(),
                        })
                    }
                };
                (LayerOp::Scale(affine), Precision::float(64), None)
            }
            "quantize" => {
                let precision = activation(&decl)?.ok_or_else(|| FrontendError::MissingPrecision(id.clone()))?;
                let spec = QuantizeSpec {
                    descending: decl.descending.clone().unwrap_or_else(|| {
                        vec![false; decl.thresholds.as_ref().map_or(0, Vec::len)]
                    }),
                    thresholds: decl.thresholds.clone(),
                };
                (LayerOp::Quantize(spec), precision, None)
            }
            "concat" => (LayerOp::Concat { arity: inputs.len() }, accumulator, None),
            other => return Err(FrontendError::UnsupportedLayerKind(other.to_string())),
        };
        net.layers.push(Layer::new(id.clone(), op, precision, inputs));
        if let Some(act) = act {
            net.layers.push(Layer::new(
                format!("{id}_act"),
                LayerOp::Quantize(QuantizeSpec::default()),
                act,
                vec![id],
            ));
        }
    }
    resolve_fc_inputs(net)
}

fn precision_fields(p: &Precision) -> (Option<u32>, Option<String>, Option<u32>) {
    let (kind, frac) = kind_name(p);
    (Some(p.bits), Some(kind.to_string()), frac)
}

/// Writes a network back out with every layer explicit.
pub fn emit_native(net: &Network) -> Result<String, FrontendError> {
    let input_idx = net.input_index()?;
    let input_layer = &net.layers[input_idx];
    let LayerOp::Input { shape } = input_layer.op else { unreachable!("input_index") };
    let (kind, frac) = kind_name(&input_layer.precision);
    let input = InputDecl {
        id: Some(input_layer.id.clone()),
        c: shape.channels,
        h: (shape.height != shape.width).then_some(shape.height),
        w: shape.width,
        bits: input_layer.precision.bits,
        kind: Some(kind.to_string()),
        frac,
    };
    let mut layers = Vec::new();
    for idx in net.topo_order()? {
        let l = &net.layers[idx];
        let mut d = LayerDecl {
            ty: l.op.kind_name().to_string(),
            id: Some(l.id.clone()),
            inputs: Some(l.inputs.clone()),
            ..Default::default()
        };
        match &l.op {
            LayerOp::Input { .. } => continue,
            LayerOp::Convolution(c) => {
                d.k = Some(c.kernel);
                d.s = Some(c.stride);
                d.pad = Some(c.pad);
                d.out = Some(c.out_channels);
                (d.w_bits, d.w_kind, d.w_frac) = precision_fields(&c.weight_precision);
                d.acc_bits = Some(l.precision.bits);
                d.acc_kind = Some(kind_name(&l.precision).0.to_string());
                d.weights = c.weights.clone();
            }
            LayerOp::FullyConnected(f) => {
                d.in_features = Some(f.in_features);
                d.out = Some(f.out_features);
                (d.w_bits, d.w_kind, d.w_frac) = precision_fields(&f.weight_precision);
                d.acc_bits = Some(l.precision.bits);
                d.acc_kind = Some(kind_name(&l.precision).0.to_string());
                d.weights = f.weights.clone();
            }
            LayerOp::MaxPool { kernel, stride } => {
                d.k = Some(*kernel);
                d.s = Some(*stride);
            }
            LayerOp::Scale(affine) => {
                if let Some(affine) = affine {
                    d.a = Some(affine.a.clone());
                    d.b = Some(affine.b.clone());
                }
            }
            LayerOp::Quantize(q) => {
                (d.a_bits, d.a_kind, d.a_frac) = precision_fields(&l.precision);
                d.thresholds = q.thresholds.clone();
                if !q.descending.is_empty() {
                    d.descending = Some(q.descending.clone());
                }
            }
            LayerOp::Concat { .. } => {}
        }
        layers.push(d);
    }
    let doc = Doc { name: net.name.clone(), input, layers };
    Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
}
