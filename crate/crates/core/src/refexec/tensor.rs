use super::RefExecError;
use crate::ir::TensorShape;

/// Feature map stored height-major with channels innermost, so element
/// `(c, y, x)` lives at `(y·W + x)·C + c`. Flat vectors are `C×1×1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: TensorShape,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: TensorShape, data: Vec<f64>) -> Result<Self, RefExecError> {
        if data.len() != shape.elements() {
            return Err(RefExecError::ShapeMismatch(format!(
                "{}x{}x{} tensor needs {} values, got {}",
                shape.channels,
                shape.height,
                shape.width,
                shape.elements(),
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: TensorShape) -> Self {
        Self { shape, data: vec![0.0; shape.elements()] }
    }

    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (y * self.shape.width + x) * self.shape.channels + c
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.index(c, y, x)]
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, RefExecError> {
        if data.len() != rows * cols {
            return Err(RefExecError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Lowers a convolution input to one row per output pixel. Column
/// `(ky·K + kx)·C + c` of row `oy·N' + ox` holds
/// `input[c, oy·S + ky − pad, ox·S + kx − pad]`, zero in the padding.
pub fn im2col_interleaved(input: &Tensor, k: usize, s: usize, pad: usize) -> Result<Matrix, RefExecError> {
    let TensorShape { channels: c, height: h, width: w } = input.shape;
    if k == 0 || s == 0 || k > h + 2 * pad || k > w + 2 * pad {
        return Err(RefExecError::ShapeMismatch(format!("window {k}/{s} pad {pad} does not fit a {h}x{w} map")));
    }
    let out_h = (h + 2 * pad - k) / s + 1;
    let out_w = (w + 2 * pad - k) / s + 1;
    let cols = k * k * c;
    let mut data = Vec::with_capacity(out_h * out_w * cols);
    for oy in 0..out_h {
        for ox in 0..out_w {
            for ky in 0..k {
                for kx in 0..k {
                    let y = (oy * s + ky) as isize - pad as isize;
                    let x = (ox * s + kx) as isize - pad as isize;
                    let inside = y >= 0 && x >= 0 && (y as usize) < h && (x as usize) < w;
                    if inside {
                        let base = input.index(0, y as usize, x as usize);
                        data.extend_from_slice(&input.data[base..base + c]);
                    } else {
                        data.extend(std::iter::repeat_n(0.0, c));
                    }
                }
            }
        }
    }
    Matrix::new(out_h * out_w, cols, data)
}
