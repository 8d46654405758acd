use proptest::prelude::*;
use quantforge::ir::{ConvSpec, LayerOp, Network, Precision, QuantizeSpec, TensorShape};
use quantforge::refexec::{execute, im2col_interleaved, mvtu, xnor_popcount_dot, Matrix, RefExecError, Tensor};

#[test]
fn two_channel_rows_interleave() {
    // Channel 0 holds 0..4, channel 1 holds 10..14, on a 2x2 map.
    let mut t = Tensor::zeros(TensorShape::square(2, 2));
    for y in 0..2 {
        for x in 0..2 {
            let (i0, i1) = (t.index(0, y, x), t.index(1, y, x));
            t.data[i0] = (y * 2 + x) as f64;
            t.data[i1] = 10.0 + (y * 2 + x) as f64;
        }
    }
    let m = im2col_interleaved(&t, 2, 1, 0).unwrap();
    assert_eq!(m.rows, 1);
    assert_eq!(m.row(0), [0.0, 10.0, 1.0, 11.0, 2.0, 12.0, 3.0, 13.0]);
}

#[test]
fn one_level_from_single_threshold() {
    let x = Matrix::new(1, 3, vec![1.0, -1.0, 1.0]).unwrap();
    let w = Matrix::new(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
    assert_eq!(mvtu(&x, &w, &QuantizeSpec::with_thresholds(vec![vec![0.0]])).unwrap(), vec![vec![1]]);
}

#[test]
fn input_outside_precision() {
    let mut net = Network::new("in");
    net.chain("in", LayerOp::Input { shape: TensorShape::flat(2) }, Precision::binary());
    let err = execute(&net, &Tensor::new(TensorShape::flat(2), vec![1.0, 0.0]).unwrap()).unwrap_err();
    assert!(matches!(err, RefExecError::InvalidInput { .. }));
    let err = execute(&net, &Tensor::new(TensorShape::flat(3), vec![1.0; 3]).unwrap()).unwrap_err();
    assert!(matches!(err, RefExecError::ShapeMismatch(_)));
}

fn bipolar(bits: u32, n: usize) -> Vec<f64> {
    (0..n).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

#[test]
fn xnor_popcount_exhaustive() {
    for n in 1..=8usize {
        for xs in 0..1u32 << n {
            for ws in 0..1u32 << n {
                let (x, w) = (bipolar(xs, n), bipolar(ws, n));
                let agree = (!(xs ^ ws) & ((1 << n) - 1)).count_ones() as i64;
                assert_eq!(xnor_popcount_dot(&x, &w), 2 * agree - n as i64);
                let plain: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
                assert_eq!(xnor_popcount_dot(&x, &w) as f64, plain);
            }
        }
    }
}

/// Convolution by direct summation over the window.
fn direct_conv(input: &Tensor, weights: &[f64], c_out: usize, k: usize, s: usize, pad: usize) -> Vec<f64> {
    let TensorShape { channels: c, height: h, width: w } = input.shape;
    let oh = (h + 2 * pad - k) / s + 1;
    let ow = (w + 2 * pad - k) / s + 1;
    let mut out = vec![0.0; c_out * oh * ow];
    for oy in 0..oh {
        for ox in 0..ow {
            for o in 0..c_out {
                let mut acc = 0.0;
                for ky in 0..k {
                    for kx in 0..k {
                        let y = (oy * s + ky) as isize - pad as isize;
                        let x = (ox * s + kx) as isize - pad as isize;
                        if y < 0 || x < 0 || y as usize >= h || x as usize >= w {
                            continue;
                        }
                        for ci in 0..c {
                            acc += input.get(ci, y as usize, x as usize) * weights[((o * k + ky) * k + kx) * c + ci];
                        }
                    }
                }
                out[(oy * ow + ox) * c_out + o] = acc;
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn conv_matches_direct_summation(
        c in 1usize..4, w in 1usize..7, k in 1usize..4, s in 1usize..3, pad in 0usize..2, c_out in 1usize..4,
        seed in any::<u64>(),
    ) {
        prop_assume!(k <= w + 2 * pad);
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 7) as f64 - 3.0
        };
        let weights: Vec<f64> = (0..c_out * k * k * c).map(|_| next()).collect();
        let data: Vec<f64> = (0..c * w * w).map(|_| next()).collect();
        let input = Tensor::new(TensorShape::square(c, w), data).unwrap();
        let mut net = Network::new("conv");
        net.chain("in", LayerOp::Input { shape: TensorShape::square(c, w) }, Precision::signed(4)).chain(
            "conv",
            LayerOp::Convolution(ConvSpec {
                kernel: k,
                stride: s,
                pad,
                out_channels: c_out,
                weight_precision: Precision::signed(3),
                weights: Some(weights.clone()),
            }),
            Precision::accumulator(),
        );
        let got = execute(&net, &input).unwrap();
        prop_assert_eq!(got.data, direct_conv(&input, &weights, c_out, k, s, pad));
    }
}
