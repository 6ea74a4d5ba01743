//! Deterministic random streams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A stream is
//! keyed by the user seed together with a purpose tag and then selected by a
//! 64-bit stream id, so every replicate of every experiment reads its own
//! keystream and results do not depend on evaluation order or thread count.
//!
//! Uniform variates on the open interval are `(k + 1/2) / 2^53`, `k` being
//! the top 53 bits of one `u64` output. They never equal 0 or 1, and
//! `1 - u` is exact whenever `u ≥ 1/2`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// One-off inverse-transform samples.
    Sample = 1,
    /// Bootstrap resampling indices; stream id = replicate index.
    Bootstrap = 2,
    /// Monte Carlo replications; stream id = [`replication_id`].
    Replication = 3,
    /// Seeds handed from a replication to its nested bootstrap.
    NestedSeed = 4,
}

/// The generator behind every draw.
pub type StreamRng = ChaCha8Rng;

/// Stream `id` of the keystream for `(seed, purpose)`.
pub fn stream(seed: u64, purpose: Purpose, id: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(id);
    rng
}

/// Stream id for replication `r` at sample size `n`.
///
/// Both fit in 32 bits for any practical experiment, so ids never collide and
/// adding a sample size to a grid leaves the other rows untouched.
pub fn replication_id(n: usize, r: usize) -> u64 {
    ((n as u64) << 32) | (r as u64 & 0xffff_ffff)
}

/// A fresh seed derived from `(seed, purpose, id)`.
pub fn derive_seed(seed: u64, purpose: Purpose, id: u64) -> u64 {
    stream(seed, purpose, id).next_u64()
}

/// Uniform variate on (0, 1).
#[inline]
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((rng.next_u64() >> 11) as f64 + 0.5) * SCALE
}
