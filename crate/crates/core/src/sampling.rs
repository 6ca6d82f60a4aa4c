//! Seeded random subsampling of symmetry events.
//!
//! The generator is pinned: ChaCha8 seeded through `seed_from_u64`, a partial
//! Fisher-Yates shuffle over event indices, and Lemire's widening-multiply
//! rejection for unbiased bounded integers. The same seed always selects the
//! same events regardless of platform.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::events::SymmetryEvent;

/// Uniform integer in `[0, bound)`.
fn bounded(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let wide = (rng.next_u64() as u128) * (bound as u128);
        if (wide as u64) >= threshold {
            return (wide >> 64) as u64;
        }
    }
}

/// Indices of a uniform `n`-subset of `0..len`, ascending.
pub fn sample_indices(len: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 || n > len {
        return Err(Error::SampleSize { requested: n, available: len });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let j = i + bounded(&mut rng, (len - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(n);
    idx.sort_unstable();
    Ok(idx)
}

/// Uniform random sample without replacement of `n` events, sorted by time.
pub fn subsample(events: &[SymmetryEvent], n: usize, seed: u64) -> Result<Vec<SymmetryEvent>> {
    Ok(sample_indices(events.len(), n, seed)?.into_iter().map(|i| events[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{ConditionId, ConditionSet};

    fn events(n: usize) -> Vec<SymmetryEvent> {
        (0..n)
            .map(|i| SymmetryEvent {
                t: i as f64 * 1e-3,
                condition: ConditionId::I,
                tags: ConditionSet::single(ConditionId::I),
                y_value: i as f64,
            })
            .collect()
    }

    #[test]
    fn full_sample_is_identity() {
        let ev = events(50);
        assert_eq!(subsample(&ev, 50, 9).unwrap(), ev);
    }

    #[test]
    fn deterministic_per_seed() {
        let ev = events(1000);
        let a = subsample(&ev, 100, 42).unwrap();
        let b = subsample(&ev, 100, 42).unwrap();
        let c = subsample(&ev, 100, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn size_errors() {
        let ev = events(10);
        assert_eq!(subsample(&ev, 11, 1), Err(Error::SampleSize { requested: 11, available: 10 }));
        assert!(subsample(&ev, 0, 1).is_err());
    }

    #[test]
    fn roughly_uniform_inclusion() {
        // each index should be picked with probability n/len = 0.1
        let mut hits = [0u32; 100];
        for seed in 0..2000 {
            for i in sample_indices(100, 10, seed).unwrap() {
                hits[i] += 1;
            }
        }
        for h in hits {
            assert!((120..=280).contains(&h), "{h}");
        }
    }
}
