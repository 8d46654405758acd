use serde::Serialize;

use super::FrontendError;
use crate::ir::{infer_shapes, LayerOp, Network, Precision};

/// One row of the workload table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadRow {
    pub layer: String,
    pub kind: String,
    /// Dot-product operations per frame; a MAC counts as two.
    pub ops: u64,
    pub params: u64,
    pub weight: Option<Precision>,
    pub activation: Option<Precision>,
    /// Weight memory in bits.
    pub weight_bits: u64,
    /// Bits of the feature map the layer consumes.
    pub activation_bits: u64,
}

impl WorkloadRow {
    /// `[W/A]`, or `None` for layers without a dot product.
    pub fn pair_label(&self) -> Option<String> {
        match (&self.weight, &self.activation) {
            (Some(w), Some(a)) => Some(format!("[{}/{}]", w.label(), a.label())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionTotal {
    pub pair: String,
    pub ops: u64,
    pub params: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadReport {
    pub network: String,
    pub rows: Vec<WorkloadRow>,
    /// Per precision pair, in order of first appearance.
    pub totals: Vec<PrecisionTotal>,
    pub total_ops: u64,
    pub total_params: u64,
    pub total_weight_bits: u64,
    pub total_activation_bits: u64,
}

/// Counts dot-product work, parameters and footprints per layer.
pub fn workload(net: &Network) -> Result<WorkloadReport, FrontendError> {
    let shaped = infer_shapes(net)?;
    let mut rows = Vec::new();
    for idx in shaped.topo_order()? {
        let layer = &shaped.layers[idx];
        let shape = shaped.shape_of(idx)?;
        let input = shape.input();
        let (ops, params, weight) = match &layer.op {
            LayerOp::Convolution(c) => {
                let params = (c.kernel * c.kernel * input.channels * c.out_channels) as u64;
                let pixels = (shape.output.height * shape.output.width) as u64;
                (2 * params * pixels, params, Some(c.weight_precision))
            }
            LayerOp::FullyConnected(f) => {
                let params = (f.in_features * f.out_features) as u64;
                (2 * params, params, Some(f.weight_precision))
            }
            LayerOp::Input { .. } => continue,
            _ => (0, 0, None),
        };
        let activation = shaped.input_precision(idx);
        rows.push(WorkloadRow {
            layer: layer.id.clone(),
            kind: layer.op.kind_name().to_string(),
            ops,
            params,
            weight,
            activation: weight.and(activation),
            weight_bits: weight.map_or(0, |w| params * u64::from(w.bits)),
            activation_bits: activation.map_or(0, |a| input.elements() as u64 * u64::from(a.bits)),
        });
    }

    let mut totals: Vec<PrecisionTotal> = Vec::new();
    for row in &rows {
        let Some(pair) = row.pair_label() else { continue };
        match totals.iter_mut().find(|t| t.pair == pair) {
            Some(t) => {
                t.ops += row.ops;
                t.params += row.params;
            }
            None => totals.push(PrecisionTotal { pair, ops: row.ops, params: row.params }),
        }
    }
    Ok(WorkloadReport {
        network: net.name.clone(),
        total_ops: rows.iter().map(|r| r.ops).sum(),
        total_params: rows.iter().map(|r| r.params).sum(),
        total_weight_bits: rows.iter().map(|r| r.weight_bits).sum(),
        total_activation_bits: rows.iter().map(|r| r.activation_bits).sum(),
        rows,
        totals,
    })
}
