//! Benchmark-only crate; the targets live under `benches/`.
//!
//! Run with `cargo bench -p scld-bench`. `cargo test --workspace` compiles
//! the benchmark targets, which keeps them from bit-rotting.
