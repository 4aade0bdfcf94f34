//! Criterion benchmarks for the core kernels live in `benches/`.

pub use lcl_core;
