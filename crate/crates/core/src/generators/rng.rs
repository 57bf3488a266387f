use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// The generators' random source: SplitMix64 seeded directly with the seed, plus
/// unbiased bounded draws by rejection.
///
/// Each step adds `0x9e3779b97f4a7c15` to the 64-bit state `x` and outputs
/// `z ^ (z >> 31)` where `z = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9`, then
/// `z = (z ^ (z >> 27)) * 0x94d049bb133111eb`, all arithmetic mod 2^64.
#[derive(Clone, Debug)]
pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..n`. Draws below `2^64 mod n` are rejected so every
    /// residue is equally likely.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    /// The first `count` entries of a partial Fisher-Yates shuffle of `0..len`.
    pub fn sample(&mut self, len: usize, count: usize) -> Vec<usize> {
        assert!(count <= len);
        let mut items: Vec<usize> = (0..len).collect();
        for i in 0..count {
            let j = i + self.below((len - i) as u64) as usize;
            items.swap(i, j);
        }
        items.truncate(count);
        items
    }
}
