//! Deterministic RNG substreams.
//!
//! Every randomized stage draws from a ChaCha8 stream derived from the master
//! seed plus a list of names (e.g. `["attack", email_id, "swap"]`). Identical
//! seed and names give an identical stream regardless of how many other
//! streams were drawn in between, so per-email results do not depend on
//! corpus ordering or thread scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Master seed wrapper that hands out named substreams.
#[derive(Debug, Clone, Copy)]
pub struct SeedSpace {
    master: u64,
}

impl SeedSpace {
    pub fn new(master: u64) -> Self {
        SeedSpace { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Derive the substream named by `parts`.
    pub fn stream(&self, parts: &[&str]) -> ChaCha8Rng {
        let mut h = Fnv1a::new();
        h.write(&self.master.to_le_bytes());
        for p in parts {
            h.write(&[0x1f]); // unit separator so ["ab","c"] != ["a","bc"]
            h.write(p.as_bytes());
        }
        ChaCha8Rng::seed_from_u64(h.finish())
    }
}

/// 64-bit FNV-1a. `DefaultHasher` is not guaranteed stable across releases;
/// this is, so goldens survive toolchain bumps.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Draw `m` distinct indices from `0..n`, uniformly, returned in ascending
/// order. Partial Fisher-Yates; panics if `m > n`.
pub fn sample_indices(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<usize> {
    assert!(m <= n, "cannot sample {m} of {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut picked = pool[..m].to_vec();
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let s = SeedSpace::new(42);
        let a: Vec<u64> = (0..8).map(|_| s.stream(&["x", "y"]).gen()).collect();
        let b: Vec<u64> = (0..8).map(|_| s.stream(&["x", "y"]).gen()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn stream_names_do_not_concatenate() {
        let s = SeedSpace::new(7);
        let a: u64 = s.stream(&["ab", "c"]).gen();
        let b: u64 = s.stream(&["a", "bc"]).gen();
        assert_ne!(a, b);
    }

    #[test]
    fn sample_is_sorted_distinct_in_range() {
        let s = SeedSpace::new(1);
        let mut rng = s.stream(&["sample"]);
        for _ in 0..100 {
            let got = sample_indices(&mut rng, 10, 4);
            assert_eq!(got.len(), 4);
            assert!(got.windows(2).all(|w| w[0] < w[1]));
            assert!(got.iter().all(|&i| i < 10));
        }
    }

    #[test]
    fn sample_full_range_is_permutation_of_all() {
        let s = SeedSpace::new(2);
        let mut rng = s.stream(&["sample"]);
        let got = sample_indices(&mut rng, 5, 5);
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
    }
}
