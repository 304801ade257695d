//! Benchmarks for the streaming engines live in `benches/`.
