//! Property checks with their oracles. Each check panics on the first
//! violation and otherwise returns a one-line summary.

use std::collections::HashMap;
use std::time::Instant;

use quantforge::cost::{
    accelerator_cost, fit_coefficients, layer_cost, mac_lut_cost, swu_bram, wm_bram, Arch, BramGeometry, Catalog,
    CostCoefficients, Folding, Impl, MeasurementRecord, PlatformSpec, ResourceEstimate, Shell,
};
use quantforge::dse::{
    balance_dataflow, balance_dataflow_traced, compute_roof, default_precision, engine_feasible, roofline,
    tile_parallelism,
};
use quantforge::frontend::{load_network, workload};
use quantforge::ir::{Affine, LayerOp, Network, Precision, QuantizeSpec, TensorShape};
use quantforge::passes::{lower_to_blocks, reorder_maxpool, run_pipeline, streamline, BlockGraph, LoweredKind};
use quantforge::refexec::{execute, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{insert_batchnorm, levels, platform_with_budget, random_input, randomize_parameters, toy_network};

// ---------------------------------------------------------------- workload

/// Independent layer-list description of the bundled CNV-6. Returns the
/// binary-layer ops, first-layer ops and parameter count.
pub fn cnv6_oracle() -> (f64, f64, f64) {
    let convs: [Option<usize>; 8] = [Some(64), Some(64), None, Some(128), Some(128), None, Some(256), Some(256)];
    let (mut c, mut n) = (3usize, 32usize);
    let (mut first, mut rest, mut params) = (0.0, 0.0, 0.0);
    for (i, conv) in convs.iter().enumerate() {
        match conv {
            Some(c_out) => {
                let n_out = n - 3 + 1;
                let ops = 2.0 * (9 * c * c_out * n_out * n_out) as f64;
                if i == 0 {
                    first += ops;
                } else {
                    rest += ops;
                }
                params += (9 * c * c_out) as f64;
                c = *c_out;
                n = n_out;
            }
            None => n /= 2,
        }
    }
    let mut d = c * n * n;
    for d_out in [512, 512, 10] {
        rest += 2.0 * (d * d_out) as f64;
        params += (d * d_out) as f64;
        d = d_out;
    }
    (rest, first, params)
}

pub fn cnv6_workload() -> String {
    let report = workload(&load_network("cnv6.net").unwrap()).unwrap();
    let (binary, first, params) = cnv6_oracle();
    let by_pair = |pair: &str| report.totals.iter().find(|t| t.pair == pair).map(|t| t.ops as f64).unwrap();
    assert_eq!(by_pair("[1/1]"), binary);
    assert_eq!(by_pair("[1/8]"), first);
    assert_eq!(report.total_params as f64, params);
    assert!((binary / 1e6 - 115.8).abs() / 115.8 < 0.01, "{binary}");
    assert!((first / 1e6 - 3.1).abs() / 3.1 < 0.01, "{first}");
    assert!(((binary + first) / 1e6 - 118.9).abs() / 118.9 < 0.01);
    assert!((1.4e6..=1.6e6).contains(&params));
    format!("CNV-6 {:.1} + {:.1} MOp, {:.2} M params", binary / 1e6, first / 1e6, params / 1e6)
}

pub fn mlp4_workload() -> String {
    let report = workload(&load_network("mlp4.net").unwrap()).unwrap();
    let dims = [784u64, 1024, 1024, 1024, 10];
    let macs: u64 = dims.windows(2).map(|w| w[0] * w[1]).sum();
    assert_eq!(report.total_ops, 2 * macs);
    assert_eq!(report.total_params, macs);
    assert!((report.total_ops as f64 / 1e6 - 5.82).abs() < 0.005);
    assert!((report.total_ops as f64 - 6.0e6).abs() / 6.0e6 < 0.03);
    assert!((report.total_params as f64 / 1e6 - 2.91).abs() < 0.005);
    format!("MLP-4 {:.2} MOp, {:.2} M params", report.total_ops as f64 / 1e6, report.total_params as f64 / 1e6)
}

// ------------------------------------------------------------ memory costs

pub const GRID: [u64; 8] = [1, 2, 3, 4, 8, 16, 32, 64];
const GEOM: BramGeometry = BramGeometry { depth: 512, width: 36 };

/// Blocks used by one memory of `depth` words of `width` bits, found by
/// filling 36-bit columns word by word and opening a new 512-word block
/// whenever the current one is full.
pub struct Packer {
    memo: HashMap<(u64, u64), u64>,
}

impl Packer {
    pub fn new() -> Self {
        Self { memo: HashMap::new() }
    }

    pub fn blocks(&mut self, depth: u64, width: u64) -> u64 {
        *self.memo.entry((depth, width)).or_insert_with(|| {
            let mut blocks = 0;
            let mut bit = 0;
            while bit < width {
                let mut used = GEOM.depth;
                for _ in 0..depth {
                    if used == GEOM.depth {
                        blocks += 1;
                        used = 0;
                    }
                    used += 1;
                }
                bit += GEOM.width;
            }
            blocks
        })
    }
}

/// Stripes of `s` rows that cover a `k`-row window, plus the stripe being
/// written.
pub fn line_stripes(k: u64, s: u64) -> u64 {
    let (mut stripes, mut covered) = (0, 0);
    while covered < k {
        stripes += 1;
        covered += s;
    }
    stripes + 1
}

pub fn swu_bram_grid() -> String {
    let mut packer = Packer::new();
    let (mut checked, mut mismatches) = (0u64, Vec::new());
    for m in GRID {
        for k in GRID {
            for s in GRID {
                for n in GRID {
                    for c in GRID {
                        for a in GRID {
                            let per_line = packer.blocks(s * n, c * a);
                            let mut oracle = 0;
                            for _ in 0..m * line_stripes(k, s) {
                                oracle += per_line;
                            }
                            let got = swu_bram(m, k, s, n, c, a as u32, GEOM);
                            if got != oracle {
                                mismatches.push((m, k, s, n, c, a, got, oracle));
                            }
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(mismatches.is_empty(), "{} mismatches, first {:?}", mismatches.len(), mismatches.first());
    format!("swu_bram {checked} points")
}

pub fn wm_bram_grid() -> String {
    let mut packer = Packer::new();
    let mut checked = 0;
    for p in GRID {
        for q in GRID {
            for w in GRID {
                for k in GRID {
                    for c in GRID {
                        for c_out in GRID {
                            let weights = k * k * c * c_out;
                            let got = wm_bram(p, q, w as u32, weights, GEOM);
                            if c % q != 0 || c_out % p != 0 {
                                if weights % (p * q) != 0 {
                                    assert!(got.is_err());
                                }
                                continue;
                            }
                            let depth = weights / (p * q);
                            let per_pe = packer.blocks(depth, q * w);
                            assert_eq!(got.unwrap(), p * per_pe, "P={p} Q={q} W={w} K={k} C={c} C'={c_out}");
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 10_000);
    format!("wm_bram {checked} points")
}

pub fn worked_memory_examples() -> String {
    let swu = [swu_bram(1, 3, 1, 32, 3, 8, GEOM), swu_bram(2, 3, 1, 32, 3, 8, GEOM), swu_bram(1, 2, 2, 32, 64, 1, GEOM)];
    let wm = [wm_bram(8, 8, 1, 3 * 3 * 64 * 64, GEOM).unwrap(), wm_bram(16, 32, 1, 1024 * 1024, GEOM).unwrap()];
    assert_eq!(swu, [4, 8, 4]);
    assert_eq!(wm, [16, 64]);
    format!("swu {swu:?}, wm {wm:?} BRAM18")
}

// ------------------------------------------------------------- calibration

const C0: f64 = 150.0;
const C1: f64 = 0.8;
const POW2: [u64; 7] = [1, 2, 4, 8, 16, 32, 64];

fn random_mvu(rng: &mut impl Rng) -> MeasurementRecord {
    let pick = |rng: &mut dyn rand::RngCore| POW2[rng.gen_range(0..POW2.len())];
    let (p, q) = (pick(rng), pick(rng));
    // At least two lanes, so the record is not a single-MAC benchmark.
    let q = if p * q == 1 { 2 } else { q };
    MeasurementRecord {
        n: p * q,
        w: rng.gen_range(1..=4),
        a: rng.gen_range(1..=4),
        p,
        q,
        m: pick(rng).min(8),
        implementation: Impl::Rtl,
        observed_luts: 0.0,
    }
}

fn truth(r: &MeasurementRecord) -> f64 {
    C0 + C1 * (r.m * r.p * r.q) as f64 * f64::from(r.w) * f64::from(r.a)
}

/// Ordinary least squares in closed form.
pub fn closed_form(records: &[MeasurementRecord]) -> (f64, f64) {
    let n = records.len() as f64;
    let xs: Vec<f64> = records.iter().map(|r| r.complexity()).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.observed_luts).collect();
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let c1 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    ((sy - c1 * sx) / n, c1)
}

pub fn calibration_noise_free() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let records: Vec<MeasurementRecord> = (0..40)
        .map(|_| {
            let mut r = random_mvu(&mut rng);
            r.observed_luts = truth(&r);
            r
        })
        .collect();
    let report = fit_coefficients(&records, &CostCoefficients::default()).unwrap();
    let c = &report.coefficients;
    let e0 = (c.mvu_c0 - C0).abs() / C0;
    let e1 = (c.mvu_c1 - C1).abs() / C1;
    assert!(e0 < 1e-9, "c0 = {}", c.mvu_c0);
    assert!(e1 < 1e-9, "c1 = {}", c.mvu_c1);
    assert!(c.calibrated);
    let (o0, o1) = closed_form(&records);
    assert!((o0 - c.mvu_c0).abs() < 1e-9 && (o1 - c.mvu_c1).abs() < 1e-12);
    format!("relative error c0 {e0:.1e}, c1 {e1:.1e}")
}

pub fn calibration_noisy_band() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut inside, mut total) = (0usize, 0usize);
    for _ in 0..1000 {
        let mut records: Vec<MeasurementRecord> = (0..100).map(|_| random_mvu(&mut rng)).collect();
        for r in &mut records {
            r.observed_luts = truth(r) * (1.0 + rng.gen_range(-0.3..=0.3));
        }
        let report = fit_coefficients(&records, &CostCoefficients::default()).unwrap();
        assert_eq!(report.band, 0.30);
        let c = &report.coefficients;
        for r in &records {
            let predicted = c.mvu_c0 + c.mvu_c1 * r.complexity();
            total += 1;
            if (predicted - truth(r)).abs() <= report.band * truth(r) {
                inside += 1;
            }
        }
    }
    let share = inside as f64 / total as f64;
    assert!(share >= 0.99, "only {share} inside the band");
    format!("{:.2}% of {total} predictions inside +-30%", share * 100.0)
}

// ------------------------------------------------------------------ passes

pub const PASS_INPUTS: usize = 100;

/// Compares every variant against `reference` on the same random inputs.
pub fn assert_equivalent(name: &str, reference: &Network, variants: &[(&str, &Network)], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<Tensor> = (0..PASS_INPUTS).map(|_| random_input(reference, &mut rng)).collect();
    let expected: Vec<Vec<i64>> = inputs.par_iter().map(|x| levels(&execute(reference, x).unwrap())).collect();
    for (variant, net) in variants {
        let mismatches = inputs
            .par_iter()
            .zip(&expected)
            .filter(|(x, want)| levels(&execute(net, x).unwrap()) != **want)
            .count();
        assert_eq!(mismatches, 0, "{name} {variant}: {mismatches} of {PASS_INPUTS} inputs differ");
    }
}

/// Bundled networks with batch norms in front of every quantizer, 30% of
/// the scales negative, against streamlining, reordering and both.
pub fn bundled_pass_equivalence() -> String {
    for (i, name) in ["mlp4.net", "cnv6.net"].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let base = load_network(name).unwrap();
        let net = randomize_parameters(&insert_batchnorm(&base), 0.3, &mut rng);
        assert!(net.layers.iter().any(|l| matches!(l.op, LayerOp::Scale(_))));

        let streamlined = streamline(&net).unwrap();
        assert!(!streamlined.layers.iter().any(|l| matches!(l.op, LayerOp::Scale(_))));
        let reordered = reorder_maxpool(&net).unwrap();
        let (both, _) = run_pipeline(&net, &["streamline", "reorder_maxpool"]).unwrap();
        let variants = [("streamline", &streamlined), ("reorder", &reordered), ("streamline+reorder", &both)];
        assert_equivalent(name, &net, &variants, 1);
    }
    format!("2 networks x {PASS_INPUTS} inputs x 3 pipelines")
}

pub fn scale_quantize(a: Vec<f64>, b: Vec<f64>, thresholds: Vec<Vec<f64>>) -> Network {
    let channels = a.len();
    let mut net = Network::new("sq");
    net.chain("in", LayerOp::Input { shape: TensorShape::flat(channels) }, Precision::signed(5))
        .chain("bn", LayerOp::Scale(Some(Affine { a, b })), Precision::float(64))
        .chain("q", LayerOp::Quantize(QuantizeSpec::with_thresholds(thresholds)), Precision::unsigned(2));
    net
}

/// Direct evaluation of `level(a·x + b)` for one channel.
pub fn oracle_level(a: f64, b: f64, thresholds: &[f64], x: f64) -> i64 {
    thresholds.iter().filter(|&&t| a * x + b >= t).count() as i64
}

/// Streamlines one scale-quantize pair and compares both networks with the
/// direct oracle at every integer input in [-8, 8].
pub fn check_scale_quantize(a: &[f64], b: &[f64], t: &[Vec<f64>]) {
    let net = scale_quantize(a.to_vec(), b.to_vec(), t.to_vec());
    let streamlined = streamline(&net).unwrap();
    let channels = a.len();
    for x in -8..=8 {
        let input = Tensor::new(TensorShape::flat(channels), vec![f64::from(x); channels]).unwrap();
        let got = levels(&execute(&net, &input).unwrap());
        let fast = levels(&execute(&streamlined, &input).unwrap());
        let want: Vec<i64> = (0..channels).map(|c| oracle_level(a[c], b[c], &t[c], f64::from(x))).collect();
        assert_eq!(got, want, "a={a:?} b={b:?} t={t:?} x={x}");
        assert_eq!(fast, want, "streamlined a={a:?} b={b:?} t={t:?} x={x}");
    }
}

/// Random negative-scale channels, each checked on all of [-8, 8].
pub fn negative_scale_cases(cases: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let channels = rng.gen_range(1..4);
        let a: Vec<f64> = (0..channels).map(|_| -[0.5, 1.0, 2.0, 4.0][rng.gen_range(0..4)]).collect();
        let b: Vec<f64> = (0..channels).map(|_| f64::from(rng.gen_range(-8i32..=8)) / 2.0).collect();
        let t: Vec<Vec<f64>> = (0..channels)
            .map(|_| {
                let mut raw: Vec<i32> = Vec::new();
                while raw.len() < 3 {
                    let v = rng.gen_range(-24..=24);
                    if !raw.contains(&v) {
                        raw.push(v);
                    }
                }
                raw.sort();
                raw.into_iter().map(|v| f64::from(v) / 2.0).collect()
            })
            .collect();
        check_scale_quantize(&a, &b, &t);
    }
    format!("{cases} negative-scale cases on [-8, 8]")
}

// ------------------------------------------------------------- balancing

pub fn divisor_count(n: u64) -> u64 {
    (1..=n).filter(|d| n % d == 0).count() as u64
}

/// Resources of a design recomputed layer by layer.
pub fn recomputed_total(graph: &BlockGraph, foldings: &[Folding], arch: Arch, platform: &PlatformSpec) -> ResourceEstimate {
    let coeffs = CostCoefficients::default();
    let costs: Vec<ResourceEstimate> = graph
        .layers
        .iter()
        .zip(foldings)
        .map(|(l, &f)| layer_cost(l, f, arch, platform, &coeffs).unwrap())
        .collect();
    accelerator_cost(&costs, arch, platform, &coeffs).total
}

/// Randomized toy networks and budgets through the traced balancer.
pub fn balancing_properties(cases: usize, seed: u64) -> String {
    let start = Instant::now();
    let coeffs = CostCoefficients::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut df, mut mo) = (0, 0);
    for case in 0..cases {
        let net = toy_network(6, &mut rng);
        let graph = lower_to_blocks(&net, Arch::Df).unwrap();
        let shell = Shell { luts: 100, bram18: 1, dsps: 0 };
        let probe = platform_with_budget(u64::MAX / 4, u64::MAX / 4, u64::MAX / 4, shell);
        let minimal = recomputed_total(&graph, &vec![Folding::MINIMAL; graph.layers.len()], Arch::Df, &probe);
        let mo_graph = lower_to_blocks(&net, Arch::Mo).unwrap();
        let offload = engine_feasible(&mo_graph, Folding::MINIMAL, &probe, &coeffs).unwrap().cost.total;
        // Per resource, between 0.3 and 4 times the minimal dataflow
        // footprint, but never below the smallest offload engine.
        let scale = |v: f64, floor: f64, rng: &mut ChaCha8Rng| (v * rng.gen_range(0.3..4.0)).max(floor).ceil() as u64;
        let luts = scale(minimal.luts, offload.luts, &mut rng);
        let bram = scale(minimal.bram18 as f64, offload.bram18 as f64, &mut rng);
        let platform = platform_with_budget(luts, bram, 1000, shell);
        let minimal_fits = minimal.fits(&platform.budget());

        let (design, trace) = balance_dataflow_traced(&graph, &platform, &coeffs).unwrap_or_else(|e| panic!("case {case}: {e}"));
        assert!(design.feasible, "case {case}");
        let total = recomputed_total(&graph, &design.foldings(), design.arch, &platform);
        assert!(total.fits(&platform.budget()), "case {case}: {total:?} over {:?}", platform.budget());
        if !minimal_fits {
            assert_eq!(design.arch, Arch::Mo, "case {case}");
            assert!(trace.fell_back);
            mo += 1;
            continue;
        }
        assert_eq!(design.arch, Arch::Df, "case {case}");
        df += 1;

        let a = &trace.complexity;
        let limits: Vec<u64> = graph
            .layers
            .iter()
            .filter(|l| l.geometry.kind != LoweredKind::Pool)
            .map(|l| (l.geometry.c * l.geometry.c_out * l.geometry.rows_out) as u64)
            .collect();
        let ratio = |m: &[u64]| a.iter().zip(m).map(|(&a, &m)| a as f64 / m as f64).fold(0.0, f64::max);
        let budget_steps: u64 = limits.iter().map(|&l| divisor_count(l)).sum();
        assert!(trace.steps.len() as u64 <= budget_steps);
        for pair in trace.steps.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            assert!(ratio(&next.m) <= ratio(&prev.m), "case {case}: max A/M grew");
            assert!(next.throughput_gops >= prev.throughput_gops, "case {case}: throughput fell");
            // The scaled layer is the lowest-index argmax among unsaturated layers.
            let mut pick: Option<(usize, f64)> = None;
            for j in 0..a.len() {
                if prev.m[j] < limits[j] {
                    let r = a[j] as f64 / prev.m[j] as f64;
                    if pick.is_none_or(|(_, best)| r > best) {
                        pick = Some((j, r));
                    }
                }
            }
            let j = pick.unwrap().0;
            assert_eq!(next.scaled.as_deref(), Some(trace.layers[j].as_str()));
            let smallest_step = (prev.m[j] + 1..=limits[j]).find(|d| limits[j] % d == 0).unwrap();
            assert_eq!(next.m[j], smallest_step);
        }
        let last = trace.steps.last().unwrap();
        let compute: Vec<_> = graph.layers.iter().filter(|l| l.geometry.kind != LoweredKind::Pool).collect();
        for (j, layer) in compute.iter().enumerate() {
            let f = design.layers.iter().find(|d| d.layer == layer.layer).unwrap().folding;
            assert_eq!(f.product(), last.m[j]);
        }
        match &trace.rejected {
            Some(r) => assert!(!r.feasible),
            None => assert!(last.m.iter().zip(&limits).all(|(m, l)| m == l), "case {case}: stopped early"),
        }
    }
    assert!(df > 0 && mo > 0, "df {df} mo {mo}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30);
    format!("{cases} networks ({df} DF, {mo} MO) in {:.2}s", elapsed.as_secs_f64())
}

pub fn tiling_exhaustive() -> String {
    let mut checked = 0u64;
    for c in 1..=12u64 {
        for c_out in 1..=12u64 {
            for n in 1..=12u64 {
                let product = c * c_out * n;
                for m in (1..=product).filter(|m| product % m == 0) {
                    let f = tile_parallelism(m, c, c_out, n);
                    assert_eq!(f.product(), m, "C={c} C'={c_out} N'={n} m={m}");
                    assert!(c % f.q == 0 && c_out % f.p == 0 && n % f.m == 0, "C={c} C'={c_out} N'={n} m={m}: {f:?}");
                    checked += 1;
                }
            }
        }
    }
    format!("{checked} (C, C', N', m) tuples")
}

// ----------------------------------------------------- architecture costs

pub fn catalog_shells() -> String {
    let catalog = Catalog::bundled();
    let pynq = catalog.get("pynq-z1").unwrap();
    assert_eq!((pynq.shell.luts, pynq.shell.bram18), (2600, 8));
    let f1 = catalog.get("aws-f1").unwrap();
    assert_eq!((f1.shell.luts, f1.shell.bram18), (297_000, 1090));
    "PYNQ-Z1 {2600 LUT, 8 BRAM18}, AWS F1 {297000 LUT, 1090 BRAM18}".to_string()
}

pub fn df_sums_and_mo_maximises() -> String {
    let catalog = Catalog::bundled();
    let coeffs = CostCoefficients::default();
    let mut checked = 0;
    for name in ["mlp4.net", "cnv6.net"] {
        let net = load_network(name).unwrap();
        for platform in &catalog.platform {
            for arch in [Arch::Df, Arch::Mo] {
                let graph = lower_to_blocks(&net, arch).unwrap();
                assert!(graph.layers.len() > 1);
                let costs: Vec<ResourceEstimate> = graph
                    .layers
                    .iter()
                    .map(|l| layer_cost(l, Folding::MINIMAL, arch, platform, &coeffs).unwrap())
                    .collect();
                let acc = accelerator_cost(&costs, arch, platform, &coeffs);
                let mut luts = 0.0f64;
                let mut bram = 0u64;
                let mut dsps = 0u64;
                for c in &costs {
                    match arch {
                        Arch::Df => {
                            luts += c.luts;
                            bram += c.bram18;
                            dsps += c.dsps;
                        }
                        Arch::Mo => {
                            luts = luts.max(c.luts);
                            bram = bram.max(c.bram18);
                            dsps = dsps.max(c.dsps);
                        }
                    }
                }
                assert_eq!(acc.engines, ResourceEstimate { luts, bram18: bram, dsps });
                assert_eq!(acc.shell.luts, platform.shell.luts as f64);
                assert_eq!(acc.shell.bram18, platform.shell.bram18);
                assert_eq!(acc.total, acc.shell + acc.arch_only());
                if arch == Arch::Df {
                    assert_eq!(acc.control, ResourceEstimate::ZERO);
                }
                checked += 1;
            }
        }
    }
    format!("{checked} network/platform/architecture combinations")
}

// ---------------------------------------------------------------- roofline

pub const INTENSITIES: [f64; 9] = [0.01, 0.1, 0.5, 1.0, 4.0, 16.0, 64.0, 256.0, 4096.0];

pub fn f1_roofline_ordering() -> String {
    let f1 = Catalog::bundled().get("aws-f1").unwrap().clone();
    let coeffs = CostCoefficients::default();
    let pair = |bits: u32| (default_precision(bits, true), default_precision(bits, false));
    let roofs: Vec<f64> = [1, 2, 8]
        .into_iter()
        .map(|b| {
            let (w, a) = pair(b);
            compute_roof(&f1, w, a, &coeffs)
        })
        .collect();
    assert!(roofs[0] > roofs[1] && roofs[1] > roofs[2], "{roofs:?}");

    for bits in [1, 2, 8] {
        let (w, a) = pair(bits);
        let r = roofline(&f1, w, a, &coeffs, &INTENSITIES);
        let per_mac = mac_lut_cost(1, w, a, Impl::Hls, &coeffs);
        let expected = f1.luts_total as f64 * f1.lut_utilization_ceiling / per_mac * 2.0 * f1.clock_mhz * 1e6 / 1e9;
        assert!((r.compute_roof_gops - expected).abs() <= 1e-9 * expected);
        for p in &r.points {
            assert_eq!(p.memory_roof_gops, f1.dram_bandwidth_gbytes * p.intensity);
            assert_eq!(p.attainable_gops, p.compute_roof_gops.min(p.memory_roof_gops));
            if p.intensity < r.ridge_intensity {
                assert_eq!(p.attainable_gops, p.memory_roof_gops);
            }
        }
    }
    format!("roofs 1/1 {:.0} > 2/2 {:.0} > 8/8 {:.0} GOp/s", roofs[0], roofs[1], roofs[2])
}

// ---------------------------------------------------------------- ballpark

pub fn cnv6_pynq_throughput() -> f64 {
    let pynq = Catalog::bundled().get("pynq-z1").unwrap().clone();
    let graph = lower_to_blocks(&load_network("cnv6.net").unwrap(), Arch::Df).unwrap();
    let design = balance_dataflow(&graph, &pynq, &CostCoefficients::load("uncalibrated").unwrap()).unwrap();
    assert!(design.feasible);
    design.perf.throughput_gops
}
