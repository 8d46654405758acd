//! Benchmarks live under `benches/`; run them with `cargo bench -p quantforge-bench`.
