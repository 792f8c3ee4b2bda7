//! Counter-based random streams.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key and
//! a 64-bit counter, so any element of any stream can be produced without
//! generating the ones before it. This is what lets a uniform field hand out
//! one clock per matrix entry, and lets trial workers run in any order while
//! producing the same bits.

use rand_core::RngCore;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the key of a child stream. Distinct `stream` values under the same
/// parent give distinct keys, because the map `stream -> key` is a bijection.
#[inline]
pub fn derive_key(parent: u64, stream: u64) -> u64 {
    mix64(parent ^ mix64(stream.wrapping_add(GOLDEN_GAMMA)))
}

/// The `index`-th output of the stream keyed by `key`.
#[inline]
pub fn draw(key: u64, index: u64) -> u64 {
    mix64(key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// A sequential view over a counter-based stream.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed),
            counter: 0,
        }
    }

    /// An independent child stream; the parent is not advanced.
    pub fn split(&self, stream: u64) -> Self {
        Self {
            key: derive_key(self.key, stream),
            counter: 0,
        }
    }

    /// Repositions the stream at `index`.
    pub fn seek(&mut self, index: u64) {
        self.counter = index;
    }

    pub fn position(&self) -> u64 {
        self.counter
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let out = draw(self.key, self.counter);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Scales a probability to a 64-bit threshold `t` such that a uniform `u64`
/// `x` satisfies `x < t` with probability `prob` (up to 2^-64). Returns `None`
/// for `prob >= 1`, meaning "always".
pub fn probability_threshold(prob: f64) -> Option<u64> {
    if prob >= 1.0 {
        None
    } else if prob <= 0.0 {
        Some(0)
    } else {
        Some((prob * 18_446_744_073_709_551_616.0) as u64)
    }
}
