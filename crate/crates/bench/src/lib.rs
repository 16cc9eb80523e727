//! Criterion benchmarks for `pp-borrow`; see `benches/`.
