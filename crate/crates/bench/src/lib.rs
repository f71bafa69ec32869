//! Fixtures shared by the benches.

use artcloud_core::workload::generate;
use artcloud_core::{Request, WorkloadSpec};

/// Deterministic pseudo-random patterns in [0, 1)^m (xorshift, no deps).
pub fn patterns(count: usize, m: usize, mut seed: u64) -> Vec<Vec<f64>> {
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..count).map(|_| (0..m).map(|_| next()).collect()).collect()
}

/// Reference-scale trace of the given length.
pub fn workload(duration: f64) -> Vec<Request> {
    generate(&WorkloadSpec::default(), duration).expect("default spec is valid").requests
}
