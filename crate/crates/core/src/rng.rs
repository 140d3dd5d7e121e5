//! Counter-based random streams.
//!
//! Every random number is addressed by `(seed, stream, counter)`. The seed
//! selects a ChaCha8 key, the stream selects an independent ChaCha stream and
//! the counter is the word position inside that stream. Work that is split
//! by stream index therefore reproduces bit-for-bit regardless of how many
//! workers process the streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier reported by `version_info`.
pub const RNG_ID: &str = "chacha8-counter/v1";

/// Stream domains keep unrelated consumers of the same seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Exact = 1,
    HitAndRun = 2,
    Counterexample = 3,
    Kernel = 4,
    Moments = 5,
    Experiment = 6,
    Spectral = 7,
}

const DOMAIN_SHIFT: u32 = 48;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Stream id for `index` inside `domain`.
pub fn stream_id(domain: Domain, index: u64) -> u64 {
    debug_assert!(index < (1u64 << DOMAIN_SHIFT));
    ((domain as u64) << DOMAIN_SHIFT) | index
}

/// A generator positioned at counter 0 of the given stream.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key_from_seed(seed));
    rng.set_stream(stream);
    rng
}

/// A generator for row `index` of `domain`.
pub fn substream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    stream(seed, stream_id(domain, index))
}

/// The 64-bit word at `counter` of `(seed, stream)`.
pub fn draw(seed: u64, stream_idx: u64, counter: u64) -> u64 {
    use rand::RngCore;
    let mut rng = stream(seed, stream_idx);
    rng.set_word_pos(u128::from(counter) * 2);
    rng.next_u64()
}

/// Uniform on [0, 1) with 53 bits of resolution.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
