//! Deterministic train/validation splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Shuffles `items` with a seeded RNG and carves off the validation set.
///
/// Returns `(train, val)`. The validation set holds exactly
/// `floor(val_fraction * n)` items — the first items of the shuffled
/// order — so the same `(items, val_fraction, seed)` triple always
/// reproduces the same split, independent of platform.
pub fn split_train_val<T>(
    mut items: Vec<T>,
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !val_fraction.is_finite() || val_fraction <= 0.0 || val_fraction >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "val_fraction must lie in (0, 1), got {val_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    items.shuffle(&mut rng);
    let val_len = (val_fraction * items.len() as f64).floor() as usize;
    let val: Vec<T> = items.drain(..val_len).collect();
    Ok((items, val))
}
