//! Subset of the darknet `.cfg` format.
//!
//! Supported sections are `[net]`, `[convolutional]`, `[maxpool]` and
//! `[connected]`. Darknet carries no precision information, so compute
//! sections need a `weight_bits` key; `quant_bits` adds a thresholding
//! activation behind the layer. Any other section is an error.

use super::native::{precision_from, Role};
use super::{resolve_fc_inputs, FrontendError};
use crate::ir::{ConvSpec, FcSpec, LayerOp, Network, Precision, QuantizeSpec, TensorShape};

struct Section {
    name: String,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&(String, String, usize)> {
        self.entries.iter().rev().find(|(k, _, _)| k == key)
    }

    fn int(&self, key: &str) -> Result<Option<usize>, FrontendError> {
        match self.get(key) {
            None => Ok(None),
            Some((_, v, line)) => v.parse().map(Some).map_err(|_| FrontendError::SyntaxError {
                line: *line,
                reason: format!("`{key}` expects an integer, found `{v}`"),
            }),
        }
    }

    fn string(&self, key: &str) -> Option<&str> {
        self.get(key).map(|(_, v, _)| v.as_str())
    }

    fn required(&self, key: &str) -> Result<usize, FrontendError> {
        self.int(key)?.ok_or_else(|| FrontendError::SyntaxError {
            line: self.line,
            reason: format!("[{}] is missing `{key}`", self.name),
        })
    }
}

fn sections(text: &str) -> Result<Vec<Section>, FrontendError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| FrontendError::SyntaxError {
                line: line_no,
                reason: "unterminated section header".into(),
            })?;
            out.push(Section { name: name.trim().to_string(), line: line_no, entries: Vec::new() });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| FrontendError::SyntaxError {
            line: line_no,
            reason: format!("expected `key=value`, found `{line}`"),
        })?;
        let section = out.last_mut().ok_or_else(|| FrontendError::SyntaxError {
            line: line_no,
            reason: "option outside of any section".into(),
        })?;
        section.entries.push((key.trim().to_string(), value.trim().to_string(), line_no));
    }
    Ok(out)
}

fn bits(section: &Section, key: &str) -> Result<Option<u32>, FrontendError> {
    Ok(section.int(key)?.map(|b| b as u32))
}

/// Parses a darknet configuration into the IR.
pub fn parse_darknet(text: &str) -> Result<Network, FrontendError> {
    let sections = sections(text)?;
    let mut iter = sections.iter();
    let head = iter.next().ok_or_else(|| FrontendError::SyntaxError {
        line: 1,
        reason: "empty configuration".into(),
    })?;
    if head.name != "net" && head.name != "network" {
        return Err(FrontendError::SyntaxError {
            line: head.line,
            reason: "configuration must start with [net]".into(),
        });
    }
    let width = head.required("width")?;
    let shape = TensorShape {
        channels: head.required("channels")?,
        height: head.int("height")?.unwrap_or(width),
        width,
    };
    let input_bits = bits(head, "quant_bits")?.unwrap_or(8);
    let input_precision =
        precision_from(input_bits, head.string("quant_kind"), None, Role::Activation, "input")?;

    let mut net = Network::new(head.string("name").unwrap_or("darknet"));
    net.chain("input", LayerOp::Input { shape }, input_precision);

    for (i, s) in iter.enumerate() {
        let id = format!("{}{}", s.name, i);
        let weight = |s: &Section| -> Result<Precision, FrontendError> {
            let b = bits(s, "weight_bits")?.ok_or_else(|| FrontendError::MissingPrecision(id.clone()))?;
            precision_from(b, s.string("weight_kind"), None, Role::Weight, &id)
        };
        let (op, quant) = match s.name.as_str() {
            "convolutional" => {
                let size = s.int("size")?.unwrap_or(1);
                let pad = match s.int("padding")? {
                    Some(p) => p,
                    None if s.int("pad")?.unwrap_or(0) != 0 => size / 2,
                    None => 0,
                };
                let op = LayerOp::Convolution(ConvSpec {
                    kernel: size,
                    stride: s.int("stride")?.unwrap_or(1),
                    pad,
                    out_channels: s.required("filters")?,
                    weight_precision: weight(s)?,
                    weights: None,
                });
                (op, bits(s, "quant_bits")?)
            }
            "connected" => {
                let op = LayerOp::FullyConnected(FcSpec {
                    in_features: 0,
                    out_features: s.required("output")?,
                    weight_precision: weight(s)?,
                    weights: None,
                });
                (op, bits(s, "quant_bits")?)
            }
            "maxpool" => {
                let stride = s.int("stride")?.unwrap_or(1);
                let size = s.int("size")?.unwrap_or(stride);
                (LayerOp::MaxPool { kernel: size, stride }, None)
            }
            other => return Err(FrontendError::UnsupportedLayerKind(other.to_string())),
        };
        net.chain(id.clone(), op, Precision::accumulator());
        if let Some(b) = quant {
            let p = precision_from(b, s.string("quant_kind"), None, Role::Activation, &id)?;
            net.chain(format!("{id}_act"), LayerOp::Quantize(QuantizeSpec::default()), p);
        }
    }
    resolve_fc_inputs(net)
}
