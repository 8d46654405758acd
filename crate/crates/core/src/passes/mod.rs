//! Graph passes over the IR.
//!
//! Transform passes return a rewritten [`Network`]; analysis passes return the
//! network unchanged together with a report. [`run_pipeline`] applies a named
//! sequence and records what each pass changed.

mod lower;
mod quantize;
mod reorder;
mod streamline;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::cost::Arch;
use crate::ir::{infer_shapes, validate, IrError, Layer, Network};

pub use lower::{lower_to_blocks, BlockGraph, BlockKind, LayerGeometry, LoweredKind, LoweredLayer};
pub use quantize::{direct_quantize, DEFAULT_QUANT_BITS};
pub use reorder::reorder_maxpool;
pub use streamline::streamline;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PassError {
    #[error("unknown pass `{0}`")]
    UnknownPass(String),
    #[error("layer `{0}` has floating-point weights but no values to quantize")]
    EmptyWeights(String),
    #[error("scale `{layer}` is zero on channel {channel}")]
    ZeroScale { layer: String, channel: usize },
    #[error("layer `{0}` lacks the parameter values needed to fold it")]
    MissingParameters(String),
    #[error("scale `{0}` sits in front of a quantizer; run `streamline` first")]
    UnstreamlinedScale(String),
    #[error("cannot quantize to {0} bits")]
    InvalidBits(u32),
    #[error(transparent)]
    Ir(#[from] IrError),
}

impl PassError {
    pub fn kind(&self) -> &'static str {
        match self {
            PassError::UnknownPass(_) => "UnknownPass",
            PassError::EmptyWeights(_) => "EmptyWeights",
            PassError::ZeroScale { .. } => "ZeroScale",
            PassError::MissingParameters(_) => "MissingParameters",
            PassError::UnstreamlinedScale(_) => "UnstreamlinedScale",
            PassError::InvalidBits(_) => "InvalidBits",
            PassError::Ir(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PassKind {
    Transform,
    Analysis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassOutcome {
    pub network: Network,
    pub diagnostics: Vec<String>,
    pub report: Option<Value>,
}

impl PassOutcome {
    fn transformed(network: Network, diagnostics: Vec<String>) -> Self {
        Self { network, diagnostics, report: None }
    }
}

pub trait Pass: Send + Sync {
    fn name(&self) -> &str;
    fn kind(&self) -> PassKind;
    /// Whether running the pass could change or report anything.
    fn applies(&self, net: &Network) -> bool;
    fn run(&self, net: &Network) -> Result<PassOutcome, PassError>;
}

struct InferShapes;
struct Validate;
struct DirectQuantize(u32);
struct Streamline;
struct ReorderMaxpool;
struct Lower;

impl Pass for InferShapes {
    fn name(&self) -> &str {
        "infer_shapes"
    }
    fn kind(&self) -> PassKind {
        PassKind::Transform
    }
    fn applies(&self, _: &Network) -> bool {
        true
    }
    fn run(&self, net: &Network) -> Result<PassOutcome, PassError> {
        Ok(PassOutcome::transformed(infer_shapes(net)?, Vec::new()))
    }
}

impl Pass for Validate {
    fn name(&self) -> &str {
        "validate"
    }
    fn kind(&self) -> PassKind {
        PassKind::Analysis
    }
    fn applies(&self, _: &Network) -> bool {
        true
    }
    fn run(&self, net: &Network) -> Result<PassOutcome, PassError> {
        let diags = validate(net);
        Ok(PassOutcome {
            network: net.clone(),
            diagnostics: diags.iter().map(ToString::to_string).collect(),
            report: Some(serde_json::to_value(&diags).expect("serializable")),
        })
    }
}

impl Pass for DirectQuantize {
    fn name(&self) -> &str {
        "direct_quantize"
    }
    fn kind(&self) -> PassKind {
        PassKind::Transform
    }
    fn applies(&self, net: &Network) -> bool {
        net.layers.iter().any(|l| quantize::float_weights(l).is_some())
    }
    fn run(&self, net: &Network) -> Result<PassOutcome, PassError> {
        Ok(PassOutcome::transformed(direct_quantize(net, self.0)?, Vec::new()))
    }
}

impl Pass for Streamline {
    fn name(&self) -> &str {
        "streamline"
    }
    fn kind(&self) -> PassKind {
        PassKind::Transform
    }
    fn applies(&self, net: &Network) -> bool {
        net.layers.iter().any(|l| matches!(l.op, crate::ir::LayerOp::Scale(_)))
    }
    fn run(&self, net: &Network) -> Result<PassOutcome, PassError> {
        let (network, diagnostics) = streamline::streamline_with_diagnostics(net)?;
        Ok(PassOutcome::transformed(network, diagnostics))
    }
}

impl Pass for ReorderMaxpool {
    fn name(&self) -> &str {
        "reorder_maxpool"
    }
    fn kind(&self) -> PassKind {
        PassKind::Transform
    }
    fn applies(&self, net: &Network) -> bool {
        net.layers.iter().any(|l| matches!(l.op, crate::ir::LayerOp::MaxPool { .. }))
    }
    fn run(&self, net: &Network) -> Result<PassOutcome, PassError> {
        let (network, diagnostics) = reorder::reorder_with_diagnostics(net)?;
        Ok(PassOutcome::transformed(network, diagnostics))
    }
}

impl Pass for Lower {
    fn name(&self) -> &str {
        "lower"
    }
    fn kind(&self) -> PassKind {
        PassKind::Analysis
    }
    fn applies(&self, net: &Network) -> bool {
        net.layers.iter().any(|l| l.op.is_compute())
    }
    fn run(&self, net: &Network) -> Result<PassOutcome, PassError> {
        let graph = lower_to_blocks(net, Arch::Df)?;
        Ok(PassOutcome {
            network: net.clone(),
            diagnostics: graph.warnings(),
            report: Some(serde_json::to_value(&graph).expect("serializable")),
        })
    }
}

/// Names accepted by [`lookup`]. `direct_quantize:<bits>` overrides the
/// default width.
pub const PASS_NAMES: &[&str] =
    &["infer_shapes", "validate", "direct_quantize", "streamline", "reorder_maxpool", "lower"];

pub fn lookup(name: &str) -> Result<Box<dyn Pass>, PassError> {
    let unknown = || PassError::UnknownPass(name.to_string());
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let pass: Box<dyn Pass> = match (base, arg) {
        ("infer_shapes", None) => Box::new(InferShapes),
        ("validate", None) => Box::new(Validate),
        ("direct_quantize", None) => Box::new(DirectQuantize(DEFAULT_QUANT_BITS)),
        ("direct_quantize", Some(bits)) => Box::new(DirectQuantize(bits.parse().map_err(|_| unknown())?)),
        ("streamline", None) => Box::new(Streamline),
        ("reorder_maxpool", None) => Box::new(ReorderMaxpool),
        ("lower", None) => Box::new(Lower),
        _ => return Err(unknown()),
    };
    Ok(pass)
}

/// What one pass did to the graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassLogEntry {
    pub pass: String,
    pub kind: PassKind,
    pub applied: bool,
    pub added: Vec<String>,
    pub removed: Vec<String>,
    pub modified: Vec<String>,
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
}

fn same_layer(a: &Layer, b: &Layer) -> bool {
    a.op == b.op && a.precision == b.precision && a.inputs == b.inputs
}

fn delta(before: &Network, after: &Network) -> (Vec<String>, Vec<String>, Vec<String>) {
    let added = after.layers.iter().filter(|l| before.layer(&l.id).is_none()).map(|l| l.id.clone()).collect();
    let removed = before.layers.iter().filter(|l| after.layer(&l.id).is_none()).map(|l| l.id.clone()).collect();
    let modified = after
        .layers
        .iter()
        .filter(|l| before.layer(&l.id).is_some_and(|b| !same_layer(b, l)))
        .map(|l| l.id.clone())
        .collect();
    (added, removed, modified)
}

/// Resolves every name first, then applies the passes in order.
pub fn run_pipeline(net: &Network, names: &[impl AsRef<str>]) -> Result<(Network, Vec<PassLogEntry>), PassError> {
    let passes = names.iter().map(|n| lookup(n.as_ref())).collect::<Result<Vec<_>, _>>()?;
    let mut current = net.clone();
    let mut log = Vec::with_capacity(passes.len());
    for (pass, name) in passes.iter().zip(names) {
        let applied = pass.applies(&current);
        let outcome = pass.run(&current)?;
        let (added, removed, modified) = delta(&current, &outcome.network);
        log.push(PassLogEntry {
            pass: name.as_ref().to_string(),
            kind: pass.kind(),
            applied,
            added,
            removed,
            modified,
            diagnostics: outcome.diagnostics,
            report: outcome.report,
        });
        current = outcome.network;
    }
    Ok((current, log))
}

/// Splits a `--passes a,b,c` style list.
pub fn parse_pass_list(list: &str) -> Vec<String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}
