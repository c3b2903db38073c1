//! Criterion benchmarks for `wavemap-core`; the bench targets live in
//! `benches/`.
