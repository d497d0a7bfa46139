//! Benchmark-only crate; see `benches/learners.rs`.
