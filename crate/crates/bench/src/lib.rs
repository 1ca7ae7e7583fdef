//! Criterion benches for the simulator hot paths; see `benches/`.
