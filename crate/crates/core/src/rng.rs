//! Reproducible random streams.
//!
//! A stream is identified by `(seed, stream_id)`. The generator behind it is
//! ChaCha20 keyed by the seed with the stream id placed in the cipher's
//! stream word, so distinct ids address disjoint keystreams and equal pairs
//! replay identical draws on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Identifier of one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derive `k` child streams with distinct ids, none equal to the parent.
    ///
    /// The derivation is a pure function of `(seed, stream_id, k)`.
    pub fn split(&self, k: usize) -> Vec<RngStream> {
        let mut ids: Vec<u64> = Vec::with_capacity(k);
        for i in 0..k as u64 {
            let mut salt = 0u64;
            let id = loop {
                let candidate = mix64(
                    self.stream_id
                        ^ mix64(self.seed.wrapping_add(0x9E37_79B9_7F4A_7C15))
                        ^ mix64((i + 1).wrapping_mul(0xD134_2543_DE82_EF95) ^ salt),
                );
                if candidate != self.stream_id && !ids.contains(&candidate) {
                    break candidate;
                }
                salt = salt.wrapping_add(1);
            };
            ids.push(id);
        }
        ids.into_iter()
            .map(|stream_id| RngStream {
                seed: self.seed,
                stream_id,
            })
            .collect()
    }
}

/// Free-function form of [`RngStream::split`].
pub fn split_stream(rng: &RngStream, k: usize) -> Vec<RngStream> {
    rng.split(k)
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
