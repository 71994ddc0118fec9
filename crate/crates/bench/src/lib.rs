//! Criterion benchmarks for `qlink-core`; see `benches/`.
