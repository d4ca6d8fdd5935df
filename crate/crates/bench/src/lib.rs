//! Library target is intentionally empty; the crate exists to host
//! criterion benchmarks.
