//! Reproducible random substreams.
//!
//! Every stochastic component draws from `substream(master, label, index)`:
//! the first eight bytes of `SHA-256(master_le || label || index_le)` seed a
//! ChaCha8 generator. Results therefore depend only on the master seed and
//! the trial index, never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn substream_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn substream(master: u64, label: &str, index: u64) -> Rng {
    Rng::seed_from_u64(substream_seed(master, label, index))
}
