//! Benchmarks live in `benches/`; run them with `cargo bench -p su11-bench`.
