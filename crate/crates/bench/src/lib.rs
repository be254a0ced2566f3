//! Criterion benchmarks for the sampler inner loop; see `benches/`.
