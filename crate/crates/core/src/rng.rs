//! Counter-based, splittable random streams.
//!
//! A stream is identified by `(master_seed, stream_id, lane)`. The 256-bit
//! ChaCha8 key is built from the master seed and the lane, and the stream id
//! selects the 64-bit ChaCha stream (nonce). Two streams that differ in any of
//! the three coordinates therefore read disjoint keystreams, and a stream can
//! be reconstructed anywhere from its coordinates alone.
//!
//! Normal variates are drawn with the ziggurat of `rand_distr::StandardNormal`
//! and exponential variates with `rand_distr::Exp1`. Both consume `u64` words
//! from the keystream in a fixed order, so outputs are reproducible across
//! runs and worker counts on the same platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

/// The concrete generator handed to samplers.
pub type StreamRng = ChaCha8Rng;

const KEY_TAG: [u8; 16] = *b"barrier-mc/key01";

/// Coordinates of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
    pub lane: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
            lane: 0,
        }
    }

    /// A sibling stream with the same seed and id but a different lane.
    pub fn lane(self, lane: u64) -> Self {
        RngStream { lane, ..self }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> StreamRng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.lane.to_le_bytes());
        key[16..].copy_from_slice(&KEY_TAG);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Derives an unrelated 64-bit seed from `seed` and a tag (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

#[inline]
pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Uniform on [0, 1).
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Lanes used by the replica pipelines. Each consumer of randomness inside a
/// replica reads its own lane, so stopping one consumer early never shifts
/// the draws seen by another.
pub mod lanes {
    pub const ARRIVALS: u64 = 1;
    pub const PATH: u64 = 2;
    pub const DECORATIONS: u64 = 3;
    pub const GRID: u64 = 4;
    pub const ROUNDING: u64 = 5;
}

/// Per-replica bundle of lane generators.
pub struct ReplicaRngs {
    pub arrivals: StreamRng,
    pub path: StreamRng,
    pub decorations: StreamRng,
}

impl ReplicaRngs {
    pub fn new(master_seed: u64, replica: u64) -> Self {
        let base = RngStream::new(master_seed, replica);
        ReplicaRngs {
            arrivals: base.lane(lanes::ARRIVALS).generator(),
            path: base.lane(lanes::PATH).generator(),
            decorations: base.lane(lanes::DECORATIONS).generator(),
        }
    }
}
