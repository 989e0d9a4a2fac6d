//! Seeding conventions.
//!
//! Every stochastic routine in this crate takes an explicit `u64` seed and
//! drives a ChaCha8 generator (`rand_chacha` 0.3), so identical inputs and
//! seeds reproduce identical results bit for bit. Independent runs of the
//! same estimation derive their seeds by XORing the run index into the base
//! seed ([`run_seed`]); nested designs (study arms, samples within arms)
//! derive decorrelated sub-stream seeds with [`substream`].

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Builds the crate-wide generator for a seed.
pub fn chain_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for an indexed parallel run: the run index XORed into the base seed.
pub fn run_seed(base: u64, index: u64) -> u64 {
    base ^ index
}

/// Seed for a tagged sub-stream (study arm, sample, replicate).
///
/// Finalizes `base` and `tag` through the SplitMix64 mixer so that nearby
/// tags yield unrelated generator states, unlike the flat XOR of
/// [`run_seed`] which is kept simple because it is a documented part of the
/// command-line contract.
pub fn substream(base: u64, tag: u64) -> u64 {
    splitmix64(base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// SplitMix64 finalizer (Steele, Lea & Flood's standard constants).
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let mut a = chain_rng(42);
        let mut b = chain_rng(42);
        for _ in 0..16 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }

    #[test]
    fn run_seed_is_xor() {
        assert_eq!(run_seed(0xABCD, 0), 0xABCD);
        assert_eq!(run_seed(0xABCD, 3), 0xABCD ^ 3);
    }

    #[test]
    fn substreams_differ_for_adjacent_tags() {
        let s0 = substream(1, 0);
        let s1 = substream(1, 1);
        assert_ne!(s0, s1);
        // A nested split must not collide with a sibling order swap.
        assert_ne!(substream(substream(1, 2), 3), substream(substream(1, 3), 2));
    }
}
