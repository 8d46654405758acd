use serde::Serialize;

use crate::cost::{mac_lut_cost, CostCoefficients, Impl, PlatformSpec};
use crate::ir::Precision;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RooflinePoint {
    /// Operations per DRAM byte.
    pub intensity: f64,
    pub compute_roof_gops: f64,
    pub memory_roof_gops: f64,
    pub attainable_gops: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Roofline {
    pub platform: String,
    pub weight: Precision,
    pub activation: Precision,
    pub compute_roof_gops: f64,
    /// Intensity at which the two roofs meet.
    pub ridge_intensity: f64,
    pub points: Vec<RooflinePoint>,
}

/// Peak GOp/s when the LUT budget is filled with HLS multiply-accumulate
/// units at precision `(w, a)`.
pub fn compute_roof(platform: &PlatformSpec, w: Precision, a: Precision, coeffs: &CostCoefficients) -> f64 {
    let luts = platform.luts_total as f64 * platform.lut_utilization_ceiling;
    let per_mac = mac_lut_cost(1, w, a, Impl::Hls, coeffs);
    luts / per_mac * 2.0 * platform.clock_hz() / 1e9
}

pub fn roofline(
    platform: &PlatformSpec,
    w: Precision,
    a: Precision,
    coeffs: &CostCoefficients,
    intensities: &[f64],
) -> Roofline {
    let roof = compute_roof(platform, w, a, coeffs);
    let points = intensities
        .iter()
        .map(|&i| {
            let memory = platform.dram_bandwidth_gbytes * i;
            RooflinePoint { intensity: i, compute_roof_gops: roof, memory_roof_gops: memory, attainable_gops: roof.min(memory) }
        })
        .collect();
    Roofline {
        platform: platform.name.clone(),
        weight: w,
        activation: a,
        compute_roof_gops: roof,
        ridge_intensity: roof / platform.dram_bandwidth_gbytes,
        points,
    }
}
