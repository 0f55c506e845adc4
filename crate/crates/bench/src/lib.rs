//! Workload builders shared by the criterion benchmarks.
//!
//! Run the suite with `cargo bench -p roadfuse-bench`. The headline numbers
//! are `fuse_image/600` (the per-image latency budget is 10 ms) and the
//! `nms` size sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadfuse_core::{BoundingBox, Detection, DistressClass, View};

/// `n` seeded detections on one 600x600 frame, drawn from a coarse lattice
/// so suppression actually has overlaps to chew through.
pub fn detection_field(n: usize, seed: u64) -> Vec<Detection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x0 = rng.random_range(0..56) as f64 * 10.0;
            let y0 = rng.random_range(0..56) as f64 * 10.0;
            let w = rng.random_range(2..=4) as f64 * 10.0;
            let h = rng.random_range(2..=4) as f64 * 10.0;
            let bbox = BoundingBox::new(x0, y0, x0 + w, y0 + h).expect("lattice box is valid");
            Detection::new(
                "bench.jpg",
                format!("m{}", rng.random_range(0..6)),
                View::Identity,
                DistressClass::ALL[rng.random_range(0..4)],
                rng.random_range(0.05..0.99),
                bbox,
            )
            .expect("bench detection is valid")
        })
        .collect()
}
