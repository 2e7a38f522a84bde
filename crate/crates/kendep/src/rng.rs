//! Deterministic seed derivation for parallel Monte Carlo.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by
//! (master seed, stream label, replicate index). Results are therefore
//! independent of the number of worker threads and of scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step, used only to expand seed material.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A ChaCha8 generator for the given (seed, stream, index) triple.
pub fn stream_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ 0xa076_1d64_78bd_642f;
    let mut key = [0u8; 32];
    let words = [
        splitmix64(&mut state) ^ stream.wrapping_mul(0xe703_7ed1_a0b4_28db),
        splitmix64(&mut state) ^ index.wrapping_mul(0x8ebc_6af0_9c88_c6e3),
        splitmix64(&mut state),
        splitmix64(&mut state),
    ];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        let mut s = w;
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Stream labels, one per Monte Carlo consumer, so distinct procedures
/// sharing a master seed never share a substream.
pub mod streams {
    pub const SAMPLER: u64 = 1;
    pub const SIGMA: u64 = 2;
    pub const PERCENTILES: u64 = 3;
    pub const PHI_CALIBRATION: u64 = 4;
    pub const REPRODUCE: u64 = 5;
}
