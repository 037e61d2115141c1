//! Seeded pseudo-random draws for the ablation harnesses.
//!
//! The generator is a hand-rolled SplitMix64 rather than an external RNG crate:
//! harness runs must replay bit-identically years later, so the stream is part
//! of the file-format contract and cannot be allowed to drift with a dependency
//! upgrade.

/// SplitMix64 generator (Steele, Lea & Flood 2014). Full 2^64 period,
/// deterministic for a given seed on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform draw in `0..n`. `n` must be non-zero.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // Multiply-shift reduction; the bias for the n used here (corpus sizes,
        // decoy pools) is far below anything observable.
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

/// First `k` positions of the seeded permutation of `0..n` (partial
/// Fisher-Yates). For a fixed seed, `sample_prefix(n, k1)` is a prefix of
/// `sample_prefix(n, k2)` whenever `k1 <= k2`, which is what makes ablation
/// rounds nested.
pub fn sample_prefix(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let k = k.min(n);
    let mut rng = SplitMix64::new(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.next_below((n - i) as u64) as usize;
        indices.swap(i, j);
    }
    indices.truncate(k);
    indices
}

/// Derive an independent sub-stream seed from a run seed and a textual tag
/// (entry id, harness phase, ...). FNV-1a over the tag, mixed into the seed.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    SplitMix64::new(seed ^ h).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_stable() {
        // Reference values for the all-zero seed, frozen so any change to the
        // generator is caught as a contract break.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(rng.next_u64(), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn sample_prefix_is_nested_and_in_range() {
        for seed in [0u64, 1, 7, 42] {
            let small = sample_prefix(100, 10, seed);
            let large = sample_prefix(100, 35, seed);
            assert_eq!(&large[..10], &small[..]);
            let mut sorted = large.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), large.len(), "draws must not repeat");
            assert!(large.iter().all(|&i| i < 100));
        }
    }

    #[test]
    fn sample_prefix_handles_edges() {
        assert!(sample_prefix(0, 0, 1).is_empty());
        assert_eq!(sample_prefix(5, 5, 9).len(), 5);
        assert_eq!(sample_prefix(5, 50, 9).len(), 5);
    }

    #[test]
    fn derived_seeds_differ_by_tag() {
        assert_ne!(derive_seed(7, "q0001"), derive_seed(7, "q0002"));
        assert_eq!(derive_seed(7, "q0001"), derive_seed(7, "q0001"));
    }
}
