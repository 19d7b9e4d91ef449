//! MinHash over character shingles.

use std::collections::HashSet;

use rand::Rng;

use crate::seed;

/// Mersenne prime 2^61 − 1 used as the permutation modulus.
const PRIME: u64 = (1 << 61) - 1;

pub const DEFAULT_PERMUTATIONS: usize = 128;
pub const SHINGLE_CHARS: usize = 5;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hashes of all character `n`-grams. Texts shorter than `n` yield one
/// shingle for the whole text; the empty text yields none.
pub fn shingles(text: &str, n: usize) -> HashSet<u64> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = HashSet::new();
    if chars.is_empty() {
        return out;
    }
    if chars.len() < n {
        out.insert(fnv1a(text.as_bytes()));
        return out;
    }
    let mut buf = String::new();
    for window in chars.windows(n) {
        buf.clear();
        buf.extend(window);
        out.insert(fnv1a(buf.as_bytes()));
    }
    out
}

#[derive(Debug, Clone)]
pub struct MinHasher {
    a: Vec<u64>,
    b: Vec<u64>,
    shingle_chars: usize,
}

pub type Signature = Vec<u64>;

impl MinHasher {
    pub fn new(permutations: usize, seed_value: u64) -> Self {
        let mut rng = seed::stream_rng(seed_value, "minhash");
        let a = (0..permutations).map(|_| rng.random_range(1..PRIME)).collect();
        let b = (0..permutations).map(|_| rng.random_range(0..PRIME)).collect();
        MinHasher {
            a,
            b,
            shingle_chars: SHINGLE_CHARS,
        }
    }

    pub fn permutations(&self) -> usize {
        self.a.len()
    }

    fn permute(&self, k: usize, x: u64) -> u64 {
        let v = (self.a[k] as u128 * (x % PRIME) as u128 + self.b[k] as u128) % PRIME as u128;
        v as u64
    }

    /// All-`u64::MAX` for an empty shingle set.
    pub fn signature(&self, text: &str) -> Signature {
        let set = shingles(text, self.shingle_chars);
        (0..self.permutations())
            .map(|k| set.iter().map(|&x| self.permute(k, x)).min().unwrap_or(u64::MAX))
            .collect()
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        estimate(&self.signature(a), &self.signature(b))
    }
}

/// Fraction of agreeing slots. Two empty signatures count as identical.
pub fn estimate(a: &Signature, b: &Signature) -> f64 {
    if a.is_empty() || a.len() != b.len() {
        return 0.0;
    }
    let equal = a.iter().zip(b).filter(|(x, y)| x == y).count();
    equal as f64 / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_disjoint_texts() {
        let h = MinHasher::new(DEFAULT_PERMUTATIONS, 1);
        assert_eq!(h.similarity("the quick brown fox", "the quick brown fox"), 1.0);
        assert_eq!(h.similarity("aaaaaaaaaa", "bbbbbbbbbb"), 0.0);
        assert_eq!(h.signature("abc").len(), 128);
    }

    #[test]
    fn shingle_counts() {
        assert_eq!(shingles("abcdefg", 5).len(), 3);
        assert_eq!(shingles("abc", 5).len(), 1);
        assert!(shingles("", 5).is_empty());
        assert_eq!(shingles("aaaaaaa", 5).len(), 1);
    }

    #[test]
    fn estimates_average_toward_exact_jaccard() {
        let a = "install the package and configure the database connection pool";
        let b = "install the package and configure the cache connection settings";
        let (sa, sb) = (shingles(a, 5), shingles(b, 5));
        let exact = sa.intersection(&sb).count() as f64 / sa.union(&sb).count() as f64;
        let batches = 40;
        let mean: f64 = (0..batches).map(|s| MinHasher::new(128, s).similarity(a, b)).sum::<f64>() / batches as f64;
        // Standard error of the mean of 40 batches of 128 slots.
        assert!((mean - exact).abs() < 3.0 * (exact * (1.0 - exact) / (128.0 * batches as f64)).sqrt() + 1e-9);
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = MinHasher::new(16, 9).signature("reproducible text");
        let b = MinHasher::new(16, 9).signature("reproducible text");
        assert_eq!(a, b);
        assert_ne!(a, MinHasher::new(16, 10).signature("reproducible text"));
    }
}
