//! Named random streams derived from one base seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::envs::EnvStreams;

/// SHA-256 of `(base, run, stream, index)`, used as a ChaCha seed.
pub fn derive_seed(base: u64, run: u64, stream: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(run.to_le_bytes());
    h.update((stream.len() as u64).to_le_bytes());
    h.update(stream.as_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

pub fn stream_rng(base: u64, run: u64, stream: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(base, run, stream, index))
}

/// Environment streams of one run. Every agent in the run gets the same.
pub fn env_streams(base: u64, run: u64) -> EnvStreams {
    EnvStreams {
        latent: stream_rng(base, run, "env", 0),
        context: stream_rng(base, run, "context", 0),
        reward: stream_rng(base, run, "reward", 0),
    }
}

/// Seed recorded in a trace: the first eight bytes of the agent stream.
pub fn trace_seed(base: u64, run: u64, agent: u64) -> u64 {
    let s = derive_seed(base, run, "agent", agent);
    u64::from_le_bytes(s[..8].try_into().expect("eight bytes"))
}
