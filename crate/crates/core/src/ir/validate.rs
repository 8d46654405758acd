use std::fmt;

use serde::Serialize;

use super::{infer_shapes, IrError, LayerOp, Network, Precision, PrecisionIssue};

/// A violated IR invariant, attributed to a layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub layer: String,
    pub issue: Issue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Issue {
    PrecisionKindMismatch,
    PrecisionOutOfRange,
    ThresholdOrder,
    ThresholdCount { expected: usize, found: usize },
    LevelOverflow { levels: usize, representable: u64 },
    NonIntegerQuantizeOutput,
    WeightCount { expected: usize, found: usize },
    WeightNotRepresentable { index: usize },
    ScaleLength { expected: usize, found: usize },
    ArityMismatch { expected: usize, found: usize },
    Graph { error: String },
}

impl Issue {
    pub fn name(&self) -> &'static str {
        match self {
            Issue::PrecisionKindMismatch => "PrecisionKindMismatch",
            Issue::PrecisionOutOfRange => "PrecisionOutOfRange",
            Issue::ThresholdOrder => "ThresholdOrder",
            Issue::ThresholdCount { .. } => "ThresholdCount",
            Issue::LevelOverflow { .. } => "LevelOverflow",
            Issue::NonIntegerQuantizeOutput => "NonIntegerQuantizeOutput",
            Issue::WeightCount { .. } => "WeightCount",
            Issue::WeightNotRepresentable { .. } => "WeightNotRepresentable",
            Issue::ScaleLength { .. } => "ScaleLength",
            Issue::ArityMismatch { .. } => "ArityMismatch",
            Issue::Graph { .. } => "Graph",
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.issue.name(), self.layer)?;
        match &self.issue {
            Issue::ThresholdCount { expected, found }
            | Issue::WeightCount { expected, found }
            | Issue::ScaleLength { expected, found }
            | Issue::ArityMismatch { expected, found } => {
                write!(f, ": expected {expected}, found {found}")
            }
            Issue::LevelOverflow { levels, representable } => {
                write!(f, ": {levels} levels, {representable} representable")
            }
            Issue::WeightNotRepresentable { index } => write!(f, ": entry {index}"),
            Issue::Graph { error } => write!(f, ": {error}"),
            _ => Ok(()),
        }
    }
}

fn precision_issue(layer: &str, p: &Precision, out: &mut Vec<Diagnostic>) {
    let issue = match p.check() {
        Ok(()) => return,
        Err(PrecisionIssue::KindMismatch) => Issue::PrecisionKindMismatch,
        Err(PrecisionIssue::OutOfRange) => Issue::PrecisionOutOfRange,
    };
    out.push(Diagnostic { layer: layer.to_string(), issue });
}

fn check_weights(layer: &str, w: &Option<Vec<f64>>, expected: usize, p: &Precision, out: &mut Vec<Diagnostic>) {
    let Some(w) = w else { return };
    if w.len() != expected {
        out.push(Diagnostic {
            layer: layer.to_string(),
            issue: Issue::WeightCount { expected, found: w.len() },
        });
    }
    if p.check().is_ok() {
        if let Some(index) = w.iter().position(|&v| !p.represents(v)) {
            out.push(Diagnostic { layer: layer.to_string(), issue: Issue::WeightNotRepresentable { index } });
        }
    }
}

/// Checks every IR invariant; an empty result means the network is well formed.
pub fn validate(net: &Network) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for layer in &net.layers {
        precision_issue(&layer.id, &layer.precision, &mut out);
        match &layer.op {
            LayerOp::Convolution(c) => precision_issue(&layer.id, &c.weight_precision, &mut out),
            LayerOp::FullyConnected(f) => precision_issue(&layer.id, &f.weight_precision, &mut out),
            LayerOp::Concat { arity } if *arity != layer.inputs.len() => out.push(Diagnostic {
                layer: layer.id.clone(),
                issue: Issue::ArityMismatch { expected: *arity, found: layer.inputs.len() },
            }),
            _ => {}
        }
    }

    let shaped = match infer_shapes(net) {
        Ok(n) => n,
        Err(e) => {
            let layer = match &e {
                IrError::ShapeMismatch { layer, .. } | IrError::UnknownLayer { layer, .. } => layer.clone(),
                IrError::DuplicateId(id) => id.clone(),
                _ => net.name.clone(),
            };
            out.push(Diagnostic { layer, issue: Issue::Graph { error: e.to_string() } });
            return out;
        }
    };

    for layer in &shaped.layers {
        let shape = layer.shape.as_ref().expect("inferred");
        let c_in = shape.input().channels;
        match &layer.op {
            LayerOp::Convolution(c) => check_weights(
                &layer.id,
                &c.weights,
                c.kernel * c.kernel * c_in * c.out_channels,
                &c.weight_precision,
                &mut out,
            ),
            LayerOp::FullyConnected(f) => check_weights(
                &layer.id,
                &f.weights,
                f.in_features * f.out_features,
                &f.weight_precision,
                &mut out,
            ),
            LayerOp::Scale(Some(affine)) => {
                for len in [affine.a.len(), affine.b.len()] {
                    if len != c_in {
                        out.push(Diagnostic {
                            layer: layer.id.clone(),
                            issue: Issue::ScaleLength { expected: c_in, found: len },
                        });
                        break;
                    }
                }
            }
            LayerOp::Quantize(q) => {
                if layer.precision.is_float() {
                    out.push(Diagnostic { layer: layer.id.clone(), issue: Issue::NonIntegerQuantizeOutput });
                }
                let Some(t) = &q.thresholds else { continue };
                if t.len() != 1 && t.len() != c_in {
                    out.push(Diagnostic {
                        layer: layer.id.clone(),
                        issue: Issue::ThresholdCount { expected: c_in, found: t.len() },
                    });
                }
                if !q.descending.is_empty() && q.descending.len() != 1 && q.descending.len() != t.len() {
                    out.push(Diagnostic {
                        layer: layer.id.clone(),
                        issue: Issue::ThresholdCount { expected: t.len(), found: q.descending.len() },
                    });
                }
                let sorted = t.iter().all(|ch| {
                    ch.iter().all(|v| v.is_finite()) && ch.windows(2).all(|w| w[0] < w[1])
                });
                if !sorted {
                    out.push(Diagnostic { layer: layer.id.clone(), issue: Issue::ThresholdOrder });
                }
                let per_channel = t.first().map_or(0, Vec::len);
                if t.iter().any(|ch| ch.len() != per_channel) {
                    out.push(Diagnostic {
                        layer: layer.id.clone(),
                        issue: Issue::ThresholdCount {
                            expected: per_channel,
                            found: t.iter().map(Vec::len).find(|&l| l != per_channel).unwrap_or(0),
                        },
                    });
                }
                if let Some(representable) = layer.precision.levels() {
                    let levels = per_channel + 1;
                    if levels as u64 > representable {
                        out.push(Diagnostic {
                            layer: layer.id.clone(),
                            issue: Issue::LevelOverflow { levels, representable },
                        });
                    }
                }
            }
            _ => {}
        }
    }
    out
}
