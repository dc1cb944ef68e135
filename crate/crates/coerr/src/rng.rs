//! Deterministic, counter-based stream derivation.
//!
//! Every random quantity in an experiment is drawn from a ChaCha stream
//! seeded by mixing the master seed with fixed tags (purpose, replication,
//! slot). Streams are therefore independent of call order: two policies, two
//! sweep points, or two processes replaying the same (seed, rep, slot) get
//! bit-identical draws, which is what makes common-random-number runs and
//! matched-seed comparisons exact.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; the standard 64-bit finalizer.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a tag into a seed.
pub fn mix(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// Derived seed for `(seed, tags...)`.
pub fn stream_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(seed);
    for &t in tags {
        s = mix(s, t);
    }
    s
}

/// ChaCha stream for `(seed, tags...)`.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, tags))
}

/// FNV-1a running hash over raw bytes; used to fingerprint the common
/// random-number streams written into result files.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }

    pub fn write_f64(&mut self, v: f64) {
        self.write(&v.to_le_bytes());
    }

    pub fn write_u64(&mut self, v: u64) {
        self.write(&v.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

/// FNV-1a of a string, for config fingerprints.
pub fn fnv1a_str(s: &str) -> u64 {
    let mut h = Fnv1a::new();
    h.write(s.as_bytes());
    h.finish()
}
