//! Benchmarks live under benches/; see `cargo bench -p lattherm-bench`.
