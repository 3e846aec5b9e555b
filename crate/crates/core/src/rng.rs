//! Deterministic seeding helpers.
//!
//! Every random choice in the pipeline flows from one user-supplied `u64`
//! seed through named substreams, so changing e.g. the bootstrap replicate
//! count never perturbs the mixture sample drawn for the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(h: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(h, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Derive the seed of a named substream from a root seed.
///
/// Stable across runs and platforms; distinct labels give unrelated streams.
pub fn substream_seed(seed: u64, label: &str) -> u64 {
    let h = fnv1a(FNV_OFFSET, label.as_bytes());
    fnv1a(h, &seed.to_le_bytes())
}

/// RNG seeded directly from a `u64`.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for the named substream of a root seed.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    seeded(substream_seed(seed, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_stable_and_distinct() {
        assert_eq!(substream_seed(7, "mixture"), substream_seed(7, "mixture"));
        assert_ne!(substream_seed(7, "mixture"), substream_seed(7, "bootstrap"));
        assert_ne!(substream_seed(7, "mixture"), substream_seed(8, "mixture"));
    }

    #[test]
    fn seeded_rng_reproduces() {
        let a: Vec<f64> = (0..4).map(|_| seeded(42).random()).collect();
        let b: Vec<f64> = (0..4).map(|_| seeded(42).random()).collect();
        assert_eq!(a, b);
    }
}
