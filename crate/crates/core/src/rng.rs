//! Counter-based random streams.
//!
//! Every random draw in a GA run is a pure function of a key path such as
//! `(seed, generation, phase, row, locus)`. Nothing is consumed from a shared
//! sequential generator, so runs are reproducible regardless of scheduling
//! and a relabeling of loci can be replayed exactly by relabeling the keys.
//!
//! The mixing function is the SplitMix64 finalizer. A key is extended one
//! word at a time with `Key::with`; the leaf draw is `Key::draw(i)`.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of run `index` from a master seed.
///
/// `derive_seed(master, i) = mix(mix(master + GOLDEN) ^ mix((i + 1) * GOLDEN))`
/// where `mix` is the SplitMix64 finalizer. This function is part of the
/// reproducibility contract and must not change between versions.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master.wrapping_add(GOLDEN)) ^ mix(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// A node in the key tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Key(u64);

impl Key {
    pub fn root(seed: u64) -> Self {
        Key(mix(seed ^ 0x5851_F42D_4C95_7F2D))
    }

    #[inline]
    pub fn with(self, word: u64) -> Self {
        Key(mix(self.0 ^ mix(word.wrapping_add(1).wrapping_mul(GOLDEN))))
    }

    /// Leaf draw: 64 uniform bits keyed on `(self, index)`.
    #[inline]
    pub fn draw(self, index: u64) -> u64 {
        mix(self.0.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// A sequential stream over the leaves of this key.
    pub fn stream(self) -> Stream {
        Stream { key: self, counter: 0 }
    }
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli(1/2) from one draw.
#[inline]
pub fn coin(bits: u64) -> bool {
    bits >> 63 == 1
}

/// Uniform integer in `0..n` by multiply-high.
#[inline]
pub fn below(bits: u64, n: u64) -> u64 {
    ((bits as u128 * n as u128) >> 64) as u64
}

/// Sequential view of a key: the i-th output is `key.draw(i)`.
#[derive(Clone, Debug)]
pub struct Stream {
    key: Key,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Key::root(seed).stream()
    }

    pub fn position(&self) -> u64 {
        self.counter
    }
}

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let out = self.key.draw(self.counter);
        self.counter += 1;
        out
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
