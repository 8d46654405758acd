//! Resource cost models: per-operation, per-block, per-layer and
//! per-accelerator, plus coefficient calibration.

mod accelerator;
mod coeffs;
mod components;
mod fit;
mod layer;
mod platform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use accelerator::{accelerator_cost, AcceleratorCost};
pub use coeffs::{CostCoefficients, Impl};
pub use components::{effective_weight_bits, mac_lut_cost, mp_lut, mvu_lut, swu_bram, wm_bram};
pub use fit::{fit_coefficients, read_records, FitReport, MeasurementRecord, ModelFit, FIT_BAND};
pub use layer::{layer_cost, Folding, ResourceEstimate};
pub use platform::{BramGeometry, Catalog, PlatformSpec, Shell, PLATFORM_DIR_ENV};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("folding does not divide layer `{layer}`: {reason}")]
    IndivisibleFolding { layer: String, reason: String },
    #[error("unknown platform `{0}`")]
    UnknownPlatform(String),
    #[error("unknown coefficient profile `{0}`")]
    UnknownProfile(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("measurement record {line}: {reason}")]
    Record { line: usize, reason: String },
}

impl CostError {
    pub fn kind(&self) -> &'static str {
        match self {
            CostError::IndivisibleFolding { .. } => "IndivisibleFolding",
            CostError::UnknownPlatform(_) => "UnknownPlatform",
            CostError::UnknownProfile(_) => "UnknownProfile",
            CostError::Config(_) => "Config",
            CostError::InvalidCoefficients(_) => "InvalidCoefficients",
            CostError::DegenerateFit(_) => "DegenerateFit",
            CostError::Record { .. } => "Record",
        }
    }
}

/// Accelerator architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arch {
    /// One engine per layer, all layers pipelined.
    #[serde(rename = "DF")]
    Df,
    /// One shared engine executing layers in sequence.
    #[serde(rename = "MO")]
    Mo,
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arch::Df => "DF",
            Arch::Mo => "MO",
        })
    }
}

impl FromStr for Arch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "df" | "dataflow" => Ok(Arch::Df),
            "mo" | "offload" => Ok(Arch::Mo),
            other => Err(format!("unknown architecture `{other}`")),
        }
    }
}
