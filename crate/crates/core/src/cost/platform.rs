use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CostError, ResourceEstimate};

/// Directory holding a `platforms.toml` that replaces the bundled catalog.
pub const PLATFORM_DIR_ENV: &str = "QUANTFORGE_PLATFORM_DIR";

const BUNDLED_CATALOG: &str = include_str!("../../profiles/platforms.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BramGeometry {
    pub depth: u64,
    pub width: u64,
}

impl Default for BramGeometry {
    fn default() -> Self {
        Self { depth: 512, width: 36 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shell {
    pub luts: u64,
    pub bram18: u64,
    pub dsps: u64,
}

impl From<Shell> for ResourceEstimate {
    fn from(s: Shell) -> Self {
        ResourceEstimate { luts: s.luts as f64, bram18: s.bram18, dsps: s.dsps }
    }
}

fn lut_ceiling() -> f64 {
    0.70
}

fn bram_ceiling() -> f64 {
    0.90
}

fn dsp_ceiling() -> f64 {
    0.90
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformSpec {
    pub name: String,
    pub luts_total: u64,
    pub bram18_total: u64,
    pub dsp_total: u64,
    pub clock_mhz: f64,
    pub dram_bandwidth_gbytes: f64,
    pub shell: Shell,
    #[serde(default)]
    pub bram_geometry: BramGeometry,
    #[serde(default = "lut_ceiling")]
    pub lut_utilization_ceiling: f64,
    #[serde(default = "bram_ceiling")]
    pub bram_utilization_ceiling: f64,
    #[serde(default = "dsp_ceiling")]
    pub dsp_utilization_ceiling: f64,
}

impl PlatformSpec {
    pub fn clock_hz(&self) -> f64 {
        self.clock_mhz * 1e6
    }

    /// Usable resources after applying the utilization ceilings.
    pub fn budget(&self) -> ResourceEstimate {
        ResourceEstimate {
            luts: self.luts_total as f64 * self.lut_utilization_ceiling,
            bram18: (self.bram18_total as f64 * self.bram_utilization_ceiling).floor() as u64,
            dsps: (self.dsp_total as f64 * self.dsp_utilization_ceiling).floor() as u64,
        }
    }

    /// DRAM bytes transferred per clock cycle at peak bandwidth.
    pub fn bytes_per_cycle(&self) -> f64 {
        self.dram_bandwidth_gbytes * 1e9 / self.clock_hz()
    }

    fn check(&self) -> Result<(), CostError> {
        let bad = |reason: String| Err(CostError::Config(format!("platform `{}`: {reason}", self.name)));
        if self.shell.luts > self.luts_total || self.shell.bram18 > self.bram18_total || self.shell.dsps > self.dsp_total {
            return bad("shell exceeds device totals".into());
        }
        for (name, v) in [
            ("lut_utilization_ceiling", self.lut_utilization_ceiling),
            ("bram_utilization_ceiling", self.bram_utilization_ceiling),
            ("dsp_utilization_ceiling", self.dsp_utilization_ceiling),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        if !(self.clock_mhz > 0.0 && self.dram_bandwidth_gbytes > 0.0) {
            return bad("clock and bandwidth must be positive".into());
        }
        if self.bram_geometry.depth == 0 || self.bram_geometry.width == 0 {
            return bad("BRAM geometry must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub platform: Vec<PlatformSpec>,
}

impl Catalog {
    pub fn from_toml(text: &str) -> Result<Self, CostError> {
        let c: Self = toml::from_str(text).map_err(|e| CostError::Config(e.to_string()))?;
        for p in &c.platform {
            p.check()?;
        }
        Ok(c)
    }

    pub fn bundled() -> Self {
        Self::from_toml(BUNDLED_CATALOG).expect("bundled catalog parses")
    }

    /// The catalog named by the environment override, else the bundled one.
    pub fn load() -> Result<Self, CostError> {
        match std::env::var_os(PLATFORM_DIR_ENV) {
            Some(dir) => {
                let path = Path::new(&dir).join("platforms.toml");
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CostError::Config(format!("{}: {e}", path.display())))?;
                Self::from_toml(&text)
            }
            None => Ok(Self::bundled()),
        }
    }

    pub fn get(&self, name: &str) -> Result<&PlatformSpec, CostError> {
        self.platform
            .iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| CostError::UnknownPlatform(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.platform.iter().map(|p| p.name.as_str()).collect()
    }
}
