//! Named random sub-streams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives the seed of the named sub-stream `stream` from `root`.
///
/// Distinct names give statistically independent streams, so modules that
/// draw from their own stream stay reproducible when another module changes
/// how many numbers it consumes.
pub fn derive(root: u64, stream: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(stream.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(root: u64, stream: &str) -> ChaCha8Rng {
    rng(derive(root, stream))
}
