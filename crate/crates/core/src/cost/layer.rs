use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::components::{mp_lut, mvu_lut, swu_bram, wm_bram};
use super::{Arch, CostCoefficients, CostError, PlatformSpec};
use crate::passes::{LoweredKind, LoweredLayer};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub luts: f64,
    pub bram18: u64,
    pub dsps: u64,
}

impl ResourceEstimate {
    pub const ZERO: Self = Self { luts: 0.0, bram18: 0, dsps: 0 };

    /// Element-wise maximum.
    pub fn max(self, other: Self) -> Self {
        Self {
            luts: self.luts.max(other.luts),
            bram18: self.bram18.max(other.bram18),
            dsps: self.dsps.max(other.dsps),
        }
    }

    /// Whether every resource class is within `budget`.
    pub fn fits(&self, budget: &Self) -> bool {
        self.luts <= budget.luts && self.bram18 <= budget.bram18 && self.dsps <= budget.dsps
    }
}

impl Add for ResourceEstimate {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self { luts: self.luts + o.luts, bram18: self.bram18 + o.bram18, dsps: self.dsps + o.dsps }
    }
}

impl std::iter::Sum for ResourceEstimate {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Add::add)
    }
}

/// Parallelism of one layer: `p` PEs, `q` SIMD lanes per PE, `m` output rows
/// processed concurrently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Folding {
    pub p: u64,
    pub q: u64,
    pub m: u64,
}

impl Folding {
    pub const MINIMAL: Self = Self { p: 1, q: 1, m: 1 };

    pub fn new(p: u64, q: u64, m: u64) -> Self {
        Self { p, q, m }
    }

    pub fn product(&self) -> u64 {
        self.p * self.q * self.m
    }
}

fn indivisible(layer: &LoweredLayer, what: &str, factor: u64, of: usize) -> CostError {
    CostError::IndivisibleFolding {
        layer: layer.layer.clone(),
        reason: format!("{what} = {factor} does not divide {of}"),
    }
}

/// Checks `Q | C`, `P | C'` and `M | N'`.
pub(crate) fn check_folding(layer: &LoweredLayer, f: Folding) -> Result<(), CostError> {
    let g = &layer.geometry;
    if f.m == 0 || g.rows_out as u64 % f.m != 0 {
        return Err(indivisible(layer, "M", f.m, g.rows_out));
    }
    if g.kind == LoweredKind::Pool {
        return Ok(());
    }
    if f.q == 0 || g.c as u64 % f.q != 0 {
        return Err(indivisible(layer, "Q", f.q, g.c));
    }
    if f.p == 0 || g.c_out as u64 % f.p != 0 {
        return Err(indivisible(layer, "P", f.p, g.c_out));
    }
    Ok(())
}

/// Resources of one lowered layer at the given folding.
pub fn layer_cost(
    layer: &LoweredLayer,
    f: Folding,
    arch: Arch,
    platform: &PlatformSpec,
    coeffs: &CostCoefficients,
) -> Result<ResourceEstimate, CostError> {
    check_folding(layer, f)?;
    let g = &layer.geometry;
    let geom = platform.bram_geometry;
    let (swu_luts, swu_dsps) = match arch {
        Arch::Df => (coeffs.swu_fixed_luts_df, 0),
        Arch::Mo => (coeffs.swu_fixed_luts_mo, coeffs.swu_fixed_dsps_mo),
    };
    let swu = || ResourceEstimate {
        luts: swu_luts as f64,
        bram18: swu_bram(f.m, g.k as u64, g.s as u64, g.n as u64, g.c as u64, g.a.bits, geom),
        dsps: swu_dsps,
    };
    let mvu = || -> Result<ResourceEstimate, CostError> {
        let w = g.w.expect("compute layers carry weights");
        let bram18 = wm_bram(f.p, f.q, w.bits, g.weight_count(), geom).map_err(|e| match e {
            CostError::IndivisibleFolding { reason, .. } => {
                CostError::IndivisibleFolding { layer: layer.layer.clone(), reason }
            }
            other => other,
        })?;
        let on_dsps = coeffs.dsp_mode && w.bits >= 8 && g.a.bits >= 8;
        Ok(if on_dsps {
            ResourceEstimate { luts: coeffs.mvu_c0, bram18, dsps: f.product() }
        } else {
            ResourceEstimate { luts: mvu_lut(f.m, f.p, f.q, w, g.a, coeffs), bram18, dsps: 0 }
        })
    };
    Ok(match g.kind {
        LoweredKind::Conv => swu() + mvu()?,
        LoweredKind::Fc => mvu()?,
        LoweredKind::Pool => {
            swu() + ResourceEstimate { luts: f.m as f64 * mp_lut(g.a, g.c as u64, coeffs), bram18: 0, dsps: 0 }
        }
    })
}
