//! Criterion benchmarks for `ep-lab-core` live under `benches/`.
