//! Benchmarks for `sqzpsk-core` live under `benches/`; run them with
//! `cargo bench -p sqzpsk-bench`.
