//! Benchmarks for the generator, activity clock and evaluation sweep live in
//! `benches/`. Run them with `cargo bench -p popcast-bench`.
