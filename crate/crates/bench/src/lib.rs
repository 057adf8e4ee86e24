//! Criterion benchmarks for `trisym`; the benches live in `benches/`.
