//! Criterion benchmarks live in `benches/`; run with `cargo bench -p branchlab-bench`.
