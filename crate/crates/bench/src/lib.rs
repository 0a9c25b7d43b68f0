//! Criterion benchmarks for the rotor solvers; see `benches/`.
