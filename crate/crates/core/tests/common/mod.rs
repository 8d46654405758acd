//! Random networks, parameters and platforms shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use quantforge::cost::{BramGeometry, PlatformSpec, Shell};
use quantforge::ir::{
    infer_shapes, Affine, ConvSpec, FcSpec, Layer, LayerOp, Network, Precision, QuantizeSpec, TensorShape, ValueKind,
};
use quantforge::refexec::Tensor;
use rand::Rng;

/// Scale multipliers exactly invertible in binary floating point.
const SCALES: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Inserts a batch-norm style `Scale` in front of every quantizer.
pub fn insert_batchnorm(net: &Network) -> Network {
    let mut out = net.clone();
    let quantizers: Vec<String> =
        out.layers.iter().filter(|l| matches!(l.op, LayerOp::Quantize(_))).map(|l| l.id.clone()).collect();
    for q in quantizers {
        let idx = out.index_of(&q).unwrap();
        let bn = format!("{q}_bn");
        let src = out.layers[idx].inputs.clone();
        out.layers.insert(idx, Layer::new(bn.clone(), LayerOp::Scale(None), Precision::float(64), src));
        out.layers[idx + 1].inputs = vec![bn];
    }
    out
}

fn weight_value(p: Precision, rng: &mut impl Rng) -> f64 {
    match p.kind {
        ValueKind::Binary => {
            if rng.gen_bool(0.5) {
                1.0
            } else {
                -1.0
            }
        }
        ValueKind::Ternary => rng.gen_range(-1..=1) as f64,
        _ => {
            let (lo, hi) = p.code_range().unwrap();
            rng.gen_range(lo..=hi) as f64
        }
    }
}

/// Fills every parameter slot with random values. Weights follow their
/// precision, scales are `±{0.5, 1, 2, 4}` (negative with probability
/// `negative`), offsets half-integers and thresholds integers spread over
/// the accumulator range of the layer. Every value is dyadic, so moving
/// thresholds through the affine maps is exact.
pub fn randomize_parameters(net: &Network, negative: f64, rng: &mut impl Rng) -> Network {
    let mut out = infer_shapes(net).unwrap();
    // Rough magnitude of each layer's output, carried through scales and pools.
    let mut spread: Vec<f64> = vec![1.0; out.layers.len()];
    for idx in out.topo_order().unwrap() {
        let shape = out.shape_of(idx).unwrap().clone();
        let c = shape.input().channels;
        let from = |out: &Network, spread: &[f64]| {
            out.layers[idx].inputs.first().and_then(|i| out.index_of(i)).map_or(1.0, |i| spread[i])
        };
        let layer_spread;
        match &mut out.layers[idx].op {
            LayerOp::Convolution(conv) => {
                let n = conv.kernel * conv.kernel * c;
                let wp = conv.weight_precision;
                conv.weights = Some((0..n * conv.out_channels).map(|_| weight_value(wp, rng)).collect());
                layer_spread = (n as f64).sqrt() * from(&out, &spread);
            }
            LayerOp::FullyConnected(fc) => {
                let wp = fc.weight_precision;
                fc.weights = Some((0..fc.in_features * fc.out_features).map(|_| weight_value(wp, rng)).collect());
                layer_spread = (fc.in_features as f64).sqrt() * from(&out, &spread);
            }
            LayerOp::Scale(affine) => {
                let a: Vec<f64> = (0..c)
                    .map(|_| {
                        let s = SCALES[rng.gen_range(0..SCALES.len())];
                        if rng.gen_bool(negative) {
                            -s
                        } else {
                            s
                        }
                    })
                    .collect();
                let b: Vec<f64> = (0..c).map(|_| rng.gen_range(-16..=16) as f64 / 2.0).collect();
                *affine = Some(Affine { a, b });
                layer_spread = 0.0;
            }
            LayerOp::Input { .. } => {
                let (lo, hi) = out.layers[idx].precision.code_range().unwrap_or((-1, 1));
                layer_spread = lo.abs().max(hi) as f64;
            }
            _ => layer_spread = 0.0,
        }
        spread[idx] = if layer_spread > 0.0 { layer_spread } else { from(&out, &spread) };
        if let LayerOp::Quantize(_) = out.layers[idx].op {
            let levels = out.layers[idx].precision.levels().unwrap();
            let s = spread[idx];
            // Thresholds relative to the raw accumulator, mapped through the
            // scale feeding the quantizer when there is one.
            let affine = out.layers[idx]
                .inputs
                .first()
                .and_then(|i| out.layer(i))
                .and_then(|l| match &l.op {
                    LayerOp::Scale(Some(a)) => Some(a.clone()),
                    _ => None,
                });
            let channels = shape.output.channels;
            let thresholds = (0..channels)
                .map(|ch| {
                    let lim = s.ceil() as i64 + 1;
                    let mut raw: Vec<i64> = Vec::new();
                    while raw.len() < (levels - 1) as usize {
                        let v = rng.gen_range(-lim..=lim);
                        if !raw.contains(&v) {
                            raw.push(v);
                        }
                        if raw.len() as i64 > 2 * lim {
                            break;
                        }
                    }
                    let mut t: Vec<f64> = match &affine {
                        Some(af) => {
                            let (a, b) = (af.a[ch.min(af.a.len() - 1)], af.b[ch.min(af.b.len() - 1)]);
                            raw.iter().map(|&r| a * r as f64 + b).collect()
                        }
                        None => raw.iter().map(|&r| r as f64).collect(),
                    };
                    t.sort_by(f64::total_cmp);
                    t
                })
                .collect();
            out.layers[idx].op = LayerOp::Quantize(QuantizeSpec::with_thresholds(thresholds));
            let p = out.layers[idx].precision;
            spread[idx] = p.level_value(0).abs().max(p.level_value(levels as u32 - 1).abs()).max(1.0);
        }
    }
    out
}

/// Random input drawn from the input layer's precision.
pub fn random_input(net: &Network, rng: &mut impl Rng) -> Tensor {
    let input = net.layers.iter().find(|l| matches!(l.op, LayerOp::Input { .. })).unwrap();
    let LayerOp::Input { shape } = input.op else { unreachable!() };
    let data = (0..shape.elements()).map(|_| weight_value(input.precision, rng)).collect();
    Tensor::new(shape, data).unwrap()
}

/// Output levels of a tensor holding quantized values.
pub fn levels(t: &Tensor) -> Vec<i64> {
    t.data.iter().map(|&v| v as i64).collect()
}

fn random_act(rng: &mut impl Rng) -> Precision {
    if rng.gen_bool(0.5) {
        Precision::binary()
    } else {
        Precision::unsigned(2)
    }
}

fn random_weight(rng: &mut impl Rng) -> Precision {
    if rng.gen_bool(0.5) {
        Precision::binary()
    } else {
        Precision::signed(2)
    }
}

/// Random chain of at most `max_layers` compute and pool layers with every
/// dimension at most 16. Each compute layer except the last is followed by
/// a quantizer.
pub fn toy_network(max_layers: usize, rng: &mut impl Rng) -> Network {
    let mut net = Network::new("toy");
    let mut c = rng.gen_range(1..=16usize);
    let mut w = rng.gen_range(1..=16usize);
    let mut act = random_act(rng);
    net.chain("in", LayerOp::Input { shape: TensorShape::square(c, w) }, act);
    let count = rng.gen_range(1..=max_layers);
    let mut flat = false;
    let mut added = 0;
    while added < count {
        let last = added + 1 == count;
        let choice = rng.gen_range(0..10);
        let id = format!("l{added}");
        if !flat && choice < 5 {
            let kernel = rng.gen_range(1..=w.min(3));
            let out_channels = rng.gen_range(1..=16);
            net.chain(
                id.clone(),
                LayerOp::Convolution(ConvSpec {
                    kernel,
                    stride: 1,
                    pad: 0,
                    out_channels,
                    weight_precision: random_weight(rng),
                    weights: None,
                }),
                Precision::accumulator(),
            );
            c = out_channels;
            w = w - kernel + 1;
        } else if !flat && choice < 7 && w >= 2 && !last {
            net.chain(id.clone(), LayerOp::MaxPool { kernel: 2, stride: 2 }, act);
            w /= 2;
            added += 1;
            continue;
        } else {
            let in_features = c * w * w;
            let out_features = rng.gen_range(1..=16);
            net.chain(
                id.clone(),
                LayerOp::FullyConnected(FcSpec {
                    in_features,
                    out_features,
                    weight_precision: random_weight(rng),
                    weights: None,
                }),
                Precision::accumulator(),
            );
            c = out_features;
            w = 1;
            flat = true;
        }
        if !last {
            act = random_act(rng);
            net.chain(format!("{id}_act"), LayerOp::Quantize(QuantizeSpec::default()), act);
        }
        added += 1;
    }
    net
}

/// Platform with the given usable budget: totals equal the budget and the
/// utilization ceilings are one.
pub fn platform_with_budget(luts: u64, bram18: u64, dsps: u64, shell: Shell) -> PlatformSpec {
    PlatformSpec {
        name: format!("toy-{luts}-{bram18}"),
        luts_total: luts,
        bram18_total: bram18,
        dsp_total: dsps,
        clock_mhz: 100.0,
        dram_bandwidth_gbytes: 1.0,
        shell,
        bram_geometry: BramGeometry::default(),
        lut_utilization_ceiling: 1.0,
        bram_utilization_ceiling: 1.0,
        dsp_utilization_ceiling: 1.0,
    }
}
