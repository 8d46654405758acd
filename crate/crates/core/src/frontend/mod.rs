//! Network description front-ends: the native JSON format, a darknet
//! configuration subset, parameter blobs and the workload report.

mod bundled;
mod darknet;
mod native;
mod params;
mod workload;

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::ir::{IrError, LayerOp, Network, TensorShape};

pub use bundled::{bundled, bundled_names, resolve_network_path, ResolvedNetwork};
pub use darknet::parse_darknet;
pub use native::{emit_native, parse_native};
pub use params::{load_parameters, parameter_count, read_blob, write_blob};
pub use workload::{workload, PrecisionTotal, WorkloadReport, WorkloadRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    #[error("syntax error on line {line}: {reason}")]
    SyntaxError { line: usize, reason: String },
    #[error("unsupported layer kind `{0}`")]
    UnsupportedLayerKind(String),
    #[error("layer `{0}` does not declare a precision")]
    MissingPrecision(String),
    #[error("invalid field in `{layer}`: {reason}")]
    InvalidField { layer: String, reason: String },
    #[error("parameter blob holds {got} values, the network needs {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("parameter blob length {0} is not a multiple of 4 bytes")]
    BlobAlignment(usize),
    #[error("layer `{0}` has too many quantization levels to load thresholds")]
    UnsupportedPrecision(String),
    #[error("unknown network `{0}`")]
    UnknownNetwork(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Ir(#[from] IrError),
}

impl FrontendError {
    pub fn kind(&self) -> &'static str {
        match self {
            FrontendError::SyntaxError { .. } => "SyntaxError",
            FrontendError::UnsupportedLayerKind(_) => "UnsupportedLayerKind",
            FrontendError::MissingPrecision(_) => "MissingPrecision",
            FrontendError::InvalidField { .. } => "InvalidField",
            FrontendError::SizeMismatch { .. } => "SizeMismatch",
            FrontendError::BlobAlignment(_) => "BlobAlignment",
            FrontendError::UnsupportedPrecision(_) => "UnsupportedPrecision",
            FrontendError::UnknownNetwork(_) => "UnknownNetwork",
            FrontendError::Io(_) => "Io",
            FrontendError::Ir(e) => e.kind(),
        }
    }
}

/// Parses a topology, picking the format from the extension (`.cfg` is
/// darknet, anything else native) or from the leading character.
pub fn parse_network(text: &str, hint: Option<&str>) -> Result<Network, FrontendError> {
    let darknet = match hint {
        Some(ext) => ext.eq_ignore_ascii_case("cfg"),
        None => text.trim_start().starts_with('['),
    };
    if darknet {
        parse_darknet(text)
    } else {
        parse_native(text)
    }
}

/// Reads a topology from disk, falling back to the bundled networks when the
/// path does not exist.
pub fn load_network(path: &str) -> Result<Network, FrontendError> {
    let resolved = resolve_network_path(path)?;
    let ext = Path::new(&resolved.name).extension().and_then(|e| e.to_str()).map(str::to_string);
    parse_network(&resolved.text, ext.as_deref())
}

/// Fills in the input width of fully connected layers declared without one.
/// Stops quietly at the first shape error; validation reports it later.
pub(crate) fn resolve_fc_inputs(mut net: Network) -> Result<Network, FrontendError> {
    let order = net.topo_order()?;
    let mut shapes: HashMap<String, TensorShape> = HashMap::new();
    for idx in order {
        let inputs: Option<Vec<TensorShape>> =
            net.layers[idx].inputs.iter().map(|id| shapes.get(id).copied()).collect();
        let Some(inputs) = inputs else { break };
        let layer = &mut net.layers[idx];
        if let LayerOp::FullyConnected(fc) = &mut layer.op {
            if fc.in_features == 0 {
                if let Some(first) = inputs.first() {
                    fc.in_features = first.elements();
                }
            }
        }
        match layer.op.output_shape(&layer.id, &inputs) {
            Ok(s) => {
                shapes.insert(layer.id.clone(), s);
            }
            Err(_) => break,
        }
    }
    Ok(net)
}
