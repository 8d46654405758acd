use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use quantforge::cost::{swu_bram, wm_bram, Arch, BramGeometry, Catalog, CostCoefficients};
use quantforge::dse::{balance_dataflow, tile_parallelism};
use quantforge::frontend::{load_network, load_parameters, parameter_count, workload};
use quantforge::ir::{LayerOp, Network};
use quantforge::passes::lower_to_blocks;
use quantforge::refexec::{execute, Tensor};

fn memory_formulas(c: &mut Criterion) {
    let geom = BramGeometry::default();
    c.bench_function("swu_bram", |b| b.iter(|| swu_bram(black_box(2), 3, 1, 32, 64, 1, geom)));
    c.bench_function("wm_bram", |b| b.iter(|| wm_bram(black_box(16), 32, 1, 1024 * 1024, geom)));
    c.bench_function("tile_parallelism", |b| b.iter(|| tile_parallelism(black_box(96), 12, 12, 12)));
}

fn balancing(c: &mut Criterion) {
    let catalog = Catalog::bundled();
    let coeffs = CostCoefficients::default();
    for (net, platform) in [("mlp4.net", "pynq-z1"), ("cnv6.net", "pynq-z1"), ("cnv6.net", "aws-f1")] {
        let graph = lower_to_blocks(&load_network(net).unwrap(), Arch::Df).unwrap();
        let platform = catalog.get(platform).unwrap().clone();
        c.bench_function(&format!("balance {net} {}", platform.name), |b| {
            b.iter(|| balance_dataflow(&graph, &platform, &coeffs).unwrap())
        });
    }
}

fn frontend(c: &mut Criterion) {
    let net = load_network("cnv6.net").unwrap();
    c.bench_function("workload cnv6", |b| b.iter(|| workload(black_box(&net)).unwrap()));
}

/// Bundled network with alternating ±1 parameters; every quantizer is
/// single-threshold, so the thresholds are trivially ascending.
fn with_parameters(name: &str) -> Network {
    let net = load_network(name).unwrap();
    let values: Vec<f32> = (0..parameter_count(&net).unwrap()).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    load_parameters(&net, &values).unwrap()
}

fn reference_execution(c: &mut Criterion) {
    let mut group = c.benchmark_group("execute");
    group.sample_size(10);
    for name in ["mlp4.net", "cnv6.net"] {
        let net = with_parameters(name);
        let input = &net.layers[0];
        let LayerOp::Input { shape } = input.op else { unreachable!("bundled networks start with their input") };
        let value = if input.precision.bits == 1 { 1.0 } else { 3.0 };
        let x = Tensor::new(shape, vec![value; shape.elements()]).unwrap();
        group.bench_function(name, |b| b.iter(|| execute(&net, &x).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, memory_formulas, balancing, frontend, reference_execution);
criterion_main!(benches);
