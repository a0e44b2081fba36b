//! Deterministic stream derivation for parallel Monte Carlo.
//!
//! A single master seed is mixed with a component tag and a replica index
//! through splitmix64 to produce one independent ChaCha stream per replica.
//! The derivation is pure, so replicas can run on any number of workers in
//! any order and still reproduce byte-identical output when results are
//! assembled in replica order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// One round of the splitmix64 output function.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a hash of a label, used to turn component names into 64-bit tags.
pub fn tag(label: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives the rng stream for `(master_seed, component tag, replica index)`.
///
/// The 32-byte ChaCha seed is four consecutive splitmix64 outputs of a state
/// initialized to `splitmix(master) ^ splitmix(tag) ^ splitmix(replica + 1)`;
/// distinct inputs give unrelated streams.
pub fn stream(master_seed: u64, component: u64, replica: u64) -> ChaCha12Rng {
    let mut a = master_seed;
    let mut b = component;
    let mut c = replica.wrapping_add(1);
    let mut state = splitmix64(&mut a) ^ splitmix64(&mut b) ^ splitmix64(&mut c);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

/// Convenience wrapper taking a component label instead of a numeric tag.
pub fn labeled_stream(master_seed: u64, label: &str, replica: u64) -> ChaCha12Rng {
    stream(master_seed, tag(label), replica)
}
