//! Microbenchmark crate; see `benches/kernels.rs`.
