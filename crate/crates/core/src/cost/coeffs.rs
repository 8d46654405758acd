use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CostError, ResourceEstimate};

/// Implementation style of a compute block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String")]
pub enum Impl {
    #[serde(rename = "RTL")]
    Rtl,
    #[serde(rename = "HLS")]
    Hls,
}

impl fmt::Display for Impl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Impl::Rtl => "RTL",
            Impl::Hls => "HLS",
        })
    }
}

impl TryFrom<String> for Impl {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for Impl {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RTL" => Ok(Impl::Rtl),
            "HLS" => Ok(Impl::Hls),
            other => Err(format!("unknown implementation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostCoefficients {
    pub profile: String,
    pub calibrated: bool,
    /// LUTs per weight-bit × activation-bit of an RTL multiply-accumulate.
    pub mac_lut_per_bitop_rtl: f64,
    pub hls_overhead_factor: f64,
    pub binaryweight_factor: f64,
    pub ternary_step_factor: f64,
    pub int2_step_factor: f64,
    pub mvu_c0: f64,
    pub mvu_c1: f64,
    pub swu_fixed_luts_df: u64,
    pub swu_fixed_luts_mo: u64,
    pub swu_fixed_dsps_mo: u64,
    pub mp_lut_per_ac: f64,
    /// Map MACs with at least 8-bit weights and activations onto DSPs.
    pub dsp_mode: bool,
    /// Scheduler and loopback plumbing of the offload engine.
    pub mo_control: ResourceEstimate,
}

const UNCALIBRATED: &str = include_str!("../../profiles/uncalibrated.toml");

impl Default for CostCoefficients {
    fn default() -> Self {
        Self::from_toml(UNCALIBRATED).expect("bundled profile parses")
    }
}

impl CostCoefficients {
    pub fn from_toml(text: &str) -> Result<Self, CostError> {
        let c: Self = toml::from_str(text).map_err(|e| CostError::Config(e.to_string()))?;
        c.check()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable")
    }

    /// A bundled profile by name, or a TOML file path.
    pub fn load(name_or_path: &str) -> Result<Self, CostError> {
        if name_or_path == "uncalibrated" {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(name_or_path)
            .map_err(|_| CostError::UnknownProfile(name_or_path.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn mac_lut_per_bitop(&self, implementation: Impl) -> f64 {
        match implementation {
            Impl::Rtl => self.mac_lut_per_bitop_rtl,
            Impl::Hls => self.mac_lut_per_bitop_rtl * self.hls_overhead_factor,
        }
    }

    pub fn check(&self) -> Result<(), CostError> {
        let factors = [
            ("hls_overhead_factor", self.hls_overhead_factor),
            ("binaryweight_factor", self.binaryweight_factor),
            ("ternary_step_factor", self.ternary_step_factor),
            ("int2_step_factor", self.int2_step_factor),
        ];
        for (name, v) in factors {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(CostError::InvalidCoefficients(format!("{name} must be at least 1, got {v}")));
            }
        }
        let positive = [
            ("mac_lut_per_bitop_rtl", self.mac_lut_per_bitop_rtl),
            ("mvu_c1", self.mvu_c1),
            ("mp_lut_per_ac", self.mp_lut_per_ac),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CostError::InvalidCoefficients(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mvu_c0 >= 0.0 && self.mvu_c0.is_finite()) {
            return Err(CostError::InvalidCoefficients(format!("mvu_c0 must be non-negative, got {}", self.mvu_c0)));
        }
        Ok(())
    }
}
