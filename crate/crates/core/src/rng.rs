//! Seed derivation for reproducible experiments.
//!
//! Every random stream is keyed by `(root seed, module tag)` through SHA-256
//! and then indexed by a trial/round/device counter via the ChaCha stream id,
//! so adding trials never shifts the draws of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

fn key(seed: u64, module: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"airfeel/v1");
    hasher.update(seed.to_le_bytes());
    hasher.update((module.len() as u64).to_le_bytes());
    hasher.update(module.as_bytes());
    hasher.finalize().into()
}

/// Independent stream for `(seed, module, index)`.
pub fn stream(seed: u64, module: &str, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, module));
    rng.set_stream(index);
    rng
}

/// Stream keyed by two counters, e.g. `(round, device)`.
pub fn stream2(seed: u64, module: &str, outer: u64, inner: u64) -> SimRng {
    let tag = format!("{module}#{outer}");
    stream(seed, &tag, inner)
}

/// Seed for the `index`-th repetition of an experiment, e.g. one of several
/// training seeds.
pub fn child_seed(seed: u64, module: &str, index: u64) -> u64 {
    use rand::Rng;
    stream(seed, module, index).random()
}
