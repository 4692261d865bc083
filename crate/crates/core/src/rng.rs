//! Deterministic, label-keyed random streams.
//!
//! Every stochastic event in a simulation (a gradient draw, a client upload
//! quantization, an edge upload quantization, ...) owns a stream derived from
//! the master seed and a structured label. A stream is fully determined by
//! `(seed, label)`, so results are independent of call order and thread
//! count, and adding new event kinds never perturbs existing streams.
//!
//! Streams are ChaCha8 generators seeded through a splitmix64 absorption of
//! the label words. ChaCha output is platform-stable; this is not
//! cryptographic key derivation and must never be used for secrets.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifies the stochastic event a stream belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamLabel {
    /// Client `client`'s stochastic gradient at local step
    /// `(cloud_round, edge_round, local_step)`.
    Gradient {
        client: u32,
        cloud_round: u32,
        edge_round: u32,
        local_step: u32,
    },
    /// Client `client`'s upload quantization at `(cloud_round, edge_round)`.
    ClientUpload {
        client: u32,
        cloud_round: u32,
        edge_round: u32,
    },
    /// Edge `edge`'s upload quantization at `cloud_round`.
    EdgeUpload { edge: u32, cloud_round: u32 },
    /// Initial model draw.
    ModelInit,
    /// Synthetic dataset generation, one stage per use site.
    DataGeneration { stage: u32 },
    /// Per-class Dirichlet split.
    Partition { class: u32 },
    /// Certification probe measurement.
    Probe { index: u32 },
}

impl StreamLabel {
    fn words(self) -> [u64; 4] {
        match self {
            StreamLabel::Gradient {
                client,
                cloud_round,
                edge_round,
                local_step,
            } => [1, client as u64, cloud_round as u64, ((edge_round as u64) << 32) | local_step as u64],
            StreamLabel::ClientUpload {
                client,
                cloud_round,
                edge_round,
            } => [2, client as u64, cloud_round as u64, edge_round as u64],
            StreamLabel::EdgeUpload { edge, cloud_round } => [3, edge as u64, cloud_round as u64, 0],
            StreamLabel::ModelInit => [4, 0, 0, 0],
            StreamLabel::DataGeneration { stage } => [5, stage as u64, 0, 0],
            StreamLabel::Partition { class } => [6, class as u64, 0, 0],
            StreamLabel::Probe { index } => [7, index as u64, 0, 0],
        }
    }
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Absorb a sequence of words into a seed, producing a child seed.
///
/// Used by the experiment harness to derive per-run seeds from
/// `(master seed, sweep coordinates, repetition)`: appending new sweep points
/// or repetitions never changes the seeds of existing ones.
pub fn child_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix(seed ^ 0xA076_1D64_78BD_642F);
    for (i, &p) in parts.iter().enumerate() {
        state = splitmix(state ^ splitmix(p ^ (i as u64).wrapping_mul(0xE703_7ED1_A0B4_28DB)));
    }
    state
}

/// A deterministic random stream keyed by `(seed, label)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Derive the stream for one event.
    pub fn derive(seed: u64, label: StreamLabel) -> Self {
        let words = label.words();
        let mut state = splitmix(seed ^ 0x853C_49E6_748F_EA9B);
        for &w in &words {
            state = splitmix(state ^ splitmix(w));
        }
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            state = splitmix(state ^ ((i as u64 + 1).wrapping_mul(0xD6E8_FEB8_6659_FD93)));
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        RngStream {
            inner: ChaCha8Rng::from_seed(key),
        }
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
