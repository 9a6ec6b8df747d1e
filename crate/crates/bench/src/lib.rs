//! Criterion benchmarks for the EDVW walk and scoring kernels live in `benches/`.
