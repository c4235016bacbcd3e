//! Criterion benchmarks for the chain laboratory live in `benches/`.
