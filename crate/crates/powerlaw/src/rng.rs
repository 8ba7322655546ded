//! Deterministic stream-split RNG.
//!
//! Everything stochastic in this crate draws from ChaCha8 generators derived
//! from a single master seed. Stream 0 belongs to the run itself; parallel
//! units of work (Monte Carlo trials, scan draws, repeated runs) get stream
//! `i + 1` for unit index `i`. Results are therefore independent of thread
//! count and of scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for stream `stream` under `master_seed`.
///
/// The (seed, stream) pair is expanded into a full 256-bit ChaCha key, so
/// distinct streams are statistically independent, not mere counter offsets.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut tag = stream.wrapping_add(1);
    let tag = splitmix64(&mut tag);
    let mut state = master_seed ^ tag;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// The run-level generator (stream 0).
pub fn master_rng(master_seed: u64) -> ChaCha8Rng {
    stream_rng(master_seed, 0)
}

/// Independent master seed for a labeled phase of a larger computation.
///
/// Phases that each consume a range of streams (say a calibration pass and a
/// simulation pass) must not share a master seed, or their streams would
/// collide; give each phase `derive_seed(master_seed, phase_label)` instead.
pub fn derive_seed(master_seed: u64, phase_label: u64) -> u64 {
    use rand::Rng;
    stream_rng(master_seed, phase_label).random()
}
