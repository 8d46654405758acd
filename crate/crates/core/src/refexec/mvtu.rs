use super::tensor::Matrix;
use super::RefExecError;
use crate::ir::QuantizeSpec;

/// Bit encoding of a bipolar value: `+1 → 1`, `−1 → 0`.
fn bipolar_bits(v: &[f64]) -> Vec<u64> {
    let mut words = vec![0u64; v.len().div_ceil(64)];
    for (i, &x) in v.iter().enumerate() {
        if x > 0.0 {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// Dot product of two bipolar vectors as `2·popcount(XNOR(x, w)) − N`.
pub fn xnor_popcount_dot(x: &[f64], w: &[f64]) -> i64 {
    let n = x.len();
    let (xb, wb) = (bipolar_bits(x), bipolar_bits(w));
    let mut agree = 0u32;
    for (i, (a, b)) in xb.iter().zip(&wb).enumerate() {
        let used = (n - i * 64).min(64);
        let mask = if used == 64 { u64::MAX } else { (1u64 << used) - 1 };
        agree += (!(a ^ b) & mask).count_ones();
    }
    2 * i64::from(agree) - n as i64
}

fn is_bipolar(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 1.0 || x == -1.0)
}

fn is_small_int(v: &[f64]) -> bool {
    v.iter().all(|&x| x.fract() == 0.0 && x.abs() <= i32::MAX as f64)
}

/// How a layer's dot products are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DotMode {
    Xnor,
    Integer,
    Real,
}

pub(crate) fn dot_mode(x: &[f64], w: &[f64]) -> DotMode {
    if is_bipolar(x) && is_bipolar(w) {
        DotMode::Xnor
    } else if is_small_int(x) && is_small_int(w) {
        DotMode::Integer
    } else {
        DotMode::Real
    }
}

pub(crate) fn dot(mode: DotMode, x: &[f64], w: &[f64]) -> Result<f64, RefExecError> {
    match mode {
        DotMode::Xnor => Ok(xnor_popcount_dot(x, w) as f64),
        DotMode::Integer => {
            let mut acc: i64 = 0;
            for (&a, &b) in x.iter().zip(w) {
                let p = (a as i64).checked_mul(b as i64).ok_or(RefExecError::Overflow)?;
                acc = acc.checked_add(p).ok_or(RefExecError::Overflow)?;
            }
            let bound = x.len() as f64
                * x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                * w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            debug_assert!((acc as f64).abs() <= bound);
            Ok(acc as f64)
        }
        DotMode::Real => Ok(x.iter().zip(w).map(|(a, b)| a * b).sum()),
    }
}

/// Accumulators `rows · weightsᵀ`: one output per row and weight row.
pub fn matmul(rows: &Matrix, weights: &Matrix) -> Result<Matrix, RefExecError> {
    if rows.cols != weights.cols {
        return Err(RefExecError::DimensionMismatch(format!(
            "rows have {} columns, weights {}",
            rows.cols, weights.cols
        )));
    }
    let mode = match (dot_mode(&rows.data, &weights.data), rows.data.is_empty()) {
        (m, false) => m,
        (_, true) => DotMode::Real,
    };
    let mut out = Vec::with_capacity(rows.rows * weights.rows);
    match mode {
        DotMode::Xnor => {
            // Pack once; the per-pair work is then a popcount per word.
            let n = rows.cols;
            let x: Vec<Vec<u64>> = (0..rows.rows).map(|r| bipolar_bits(rows.row(r))).collect();
            let w: Vec<Vec<u64>> = (0..weights.rows).map(|o| bipolar_bits(weights.row(o))).collect();
            let tail = n % 64;
            let last_mask = if tail == 0 { u64::MAX } else { (1u64 << tail) - 1 };
            for xr in &x {
                for wr in &w {
                    let mut agree = 0u32;
                    for (i, (a, b)) in xr.iter().zip(wr).enumerate() {
                        let mask = if i + 1 == xr.len() { last_mask } else { u64::MAX };
                        agree += (!(a ^ b) & mask).count_ones();
                    }
                    out.push((2 * i64::from(agree) - n as i64) as f64);
                }
            }
        }
        DotMode::Integer => {
            let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let bound = rows.cols as f64 * max_abs(&rows.data) * max_abs(&weights.data);
            if bound < 2f64.powi(62) {
                // No partial sum can overflow, so plain i64 arithmetic is exact.
                let x: Vec<i64> = rows.data.iter().map(|&v| v as i64).collect();
                let w: Vec<i64> = weights.data.iter().map(|&v| v as i64).collect();
                let cols = rows.cols;
                for r in 0..rows.rows {
                    let xr = &x[r * cols..(r + 1) * cols];
                    for o in 0..weights.rows {
                        let wr = &w[o * cols..(o + 1) * cols];
                        out.push(xr.iter().zip(wr).map(|(a, b)| a * b).sum::<i64>() as f64);
                    }
                }
            } else {
                for r in 0..rows.rows {
                    for o in 0..weights.rows {
                        out.push(dot(mode, rows.row(r), weights.row(o))?);
                    }
                }
            }
        }
        DotMode::Real => {
            for r in 0..rows.rows {
                for o in 0..weights.rows {
                    out.push(dot(mode, rows.row(r), weights.row(o))?);
                }
            }
        }
    }
    Matrix::new(rows.rows, weights.rows, out)
}

/// Matrix-vector-threshold unit: accumulate, then count the thresholds each
/// output channel passes in its comparison direction.
pub fn mvtu(rows: &Matrix, weights: &Matrix, quant: &QuantizeSpec) -> Result<Vec<Vec<u32>>, RefExecError> {
    let acc = matmul(rows, weights)?;
    Ok((0..acc.rows)
        .map(|r| acc.row(r).iter().enumerate().map(|(ch, &v)| quant.level(ch, v)).collect())
        .collect())
}
