//! Benchmarks for the forest enumerator and the R-operation live in `benches/`.
