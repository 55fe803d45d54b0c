//! Criterion benchmarks for `ancilla-core`; see `benches/`.
