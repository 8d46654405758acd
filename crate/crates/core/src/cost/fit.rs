//! Least-squares calibration of the LUT coefficients from measurements.
//!
//! Records with `P = Q = M = 1` are single multiply-accumulate benchmarks and
//! fit `luts = k·N·W·A` per implementation style. All other records describe
//! whole MVUs and fit `luts = c0 + c1·M·P·Q·W·A`.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{CostCoefficients, CostError, Impl};

/// Relative prediction error the model is expected to stay within.
pub const FIT_BAND: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "W")]
    pub w: u32,
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "P")]
    pub p: u64,
    #[serde(rename = "Q")]
    pub q: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "impl")]
    pub implementation: Impl,
    #[serde(rename = "luts")]
    pub observed_luts: f64,
}

impl MeasurementRecord {
    pub fn is_mac(&self) -> bool {
        self.p == 1 && self.q == 1 && self.m == 1
    }

    /// The regressor of the model this record belongs to.
    pub fn complexity(&self) -> f64 {
        let bits = f64::from(self.w) * f64::from(self.a);
        if self.is_mac() {
            self.n as f64 * bits
        } else {
            (self.m * self.p * self.q) as f64 * bits
        }
    }
}

/// Parses `N,W,A,P,Q,M,impl,luts` CSV.
pub fn read_records(reader: impl Read) -> Result<Vec<MeasurementRecord>, CostError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<MeasurementRecord>().enumerate() {
        // Line 1 is the header.
        let line = i + 2;
        let rec = row.map_err(|e| CostError::Record { line, reason: e.to_string() })?;
        if rec.n == 0 || rec.w == 0 || rec.a == 0 || rec.p == 0 || rec.q == 0 || rec.m == 0 {
            return Err(CostError::Record { line, reason: "dimensions must be at least 1".into() });
        }
        if !(rec.observed_luts.is_finite() && rec.observed_luts > 0.0) {
            return Err(CostError::Record { line, reason: "observed LUTs must be positive".into() });
        }
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub model: String,
    pub records: usize,
    pub intercept: f64,
    pub slope: f64,
    pub max_relative_error: f64,
    pub mean_relative_error: f64,
    /// Share of records whose observation is outside ±30% of the prediction.
    pub outside_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub band: f64,
    pub fits: Vec<ModelFit>,
    pub coefficients: CostCoefficients,
}

fn distinct(xs: &[f64]) -> bool {
    xs.iter().any(|&x| x != xs[0])
}

/// Least squares with intercept on relative residuals `(ŷ - y) / y`, so the
/// many small designs weigh as much as the few large ones.
fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let ws: Vec<f64> = ys.iter().map(|y| 1.0 / (y * y)).collect();
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(&ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(&ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(&ws) {
        sxy += w * (x - mx) * (y - my);
        sxx += w * (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Relative least squares through the origin.
fn ols_origin(xs: &[f64], ys: &[f64]) -> f64 {
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x / y).sum();
    let sxx: f64 = xs.iter().zip(ys).map(|(x, y)| (x / y) * (x / y)).sum();
    sxy / sxx
}

fn summarize(model: &str, xs: &[f64], ys: &[f64], intercept: f64, slope: f64) -> ModelFit {
    let errs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| ((intercept + slope * x) - y).abs() / y).collect();
    let outside = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| {
            let pred = intercept + slope * *x;
            (*y - pred).abs() > FIT_BAND * pred.abs()
        })
        .count();
    ModelFit {
        model: model.to_string(),
        records: xs.len(),
        intercept,
        slope,
        max_relative_error: errs.iter().copied().fold(0.0, f64::max),
        mean_relative_error: errs.iter().sum::<f64>() / errs.len() as f64,
        outside_band: outside as f64 / xs.len() as f64,
    }
}

/// Fits the MVU and MAC coefficients present in `records`, starting from
/// `base` for everything the records do not determine.
pub fn fit_coefficients(records: &[MeasurementRecord], base: &CostCoefficients) -> Result<FitReport, CostError> {
    let mut coeffs = base.clone();
    let mut fits = Vec::new();

    let (mac, mvu): (Vec<&MeasurementRecord>, Vec<&MeasurementRecord>) = records.iter().partition(|r| r.is_mac());
    if !mvu.is_empty() {
        let xs: Vec<f64> = mvu.iter().map(|r| r.complexity()).collect();
        let ys: Vec<f64> = mvu.iter().map(|r| r.observed_luts).collect();
        if xs.len() < 2 || !distinct(&xs) {
            return Err(CostError::DegenerateFit("MVU records need at least two distinct M·P·Q·W·A values".into()));
        }
        let (c0, c1) = ols(&xs, &ys);
        coeffs.mvu_c0 = c0;
        coeffs.mvu_c1 = c1;
        fits.push(summarize("mvu", &xs, &ys, c0, c1));
    }

    let mut per_impl = [None, None];
    for (slot, implementation) in [Impl::Rtl, Impl::Hls].into_iter().enumerate() {
        let rs: Vec<&&MeasurementRecord> = mac.iter().filter(|r| r.implementation == implementation).collect();
        if rs.is_empty() {
            continue;
        }
        let xs: Vec<f64> = rs.iter().map(|r| r.complexity()).collect();
        let ys: Vec<f64> = rs.iter().map(|r| r.observed_luts).collect();
        if xs.len() < 2 || !distinct(&xs) {
            return Err(CostError::DegenerateFit(format!(
                "{implementation} MAC records need at least two distinct N·W·A values"
            )));
        }
        let k = ols_origin(&xs, &ys);
        per_impl[slot] = Some(k);
        fits.push(summarize(&format!("mac-{}", implementation.to_string().to_lowercase()), &xs, &ys, 0.0, k));
    }
    match per_impl {
        [Some(rtl), Some(hls)] => {
            coeffs.mac_lut_per_bitop_rtl = rtl;
            coeffs.hls_overhead_factor = hls / rtl;
        }
        [Some(rtl), None] => coeffs.mac_lut_per_bitop_rtl = rtl,
        [None, Some(hls)] => coeffs.mac_lut_per_bitop_rtl = hls / coeffs.hls_overhead_factor,
        [None, None] => {}
    }

    if fits.is_empty() {
        return Err(CostError::DegenerateFit("no measurement records".into()));
    }
    coeffs.profile = "calibrated".into();
    coeffs.calibrated = true;
    Ok(FitReport { band: FIT_BAND, fits, coefficients: coeffs })
}
