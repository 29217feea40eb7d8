//! Criterion benchmarks for the expansion pipeline; see `benches/pipeline.rs`.
