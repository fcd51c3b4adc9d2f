//! Deterministic stream derivation for parallel Monte Carlo.
//!
//! Every (seed, replicate, retry) triple maps to an independent ChaCha8
//! stream through a SplitMix64 key expansion, so replicate r always sees the
//! same draws no matter how many workers run or in which order they finish.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; the standard finalizer from Vigna's reference code.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for one replicate (and retry attempt) of a run with master `seed`.
pub fn replicate_rng(seed: u64, replicate: u64, retry: u32) -> ChaCha8Rng {
    let mut state = seed;
    // fold the stream coordinates in before expanding the 256-bit key
    let mut key = [0u8; 32];
    let a = splitmix64(&mut state) ^ replicate.wrapping_mul(0xA24B_AED4_963E_E407);
    let mut mix = a ^ ((retry as u64) << 1 | 1).wrapping_mul(0x9FB2_1C65_1E98_DF25);
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut mix).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
