//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream keyed by
//! `(master_seed, domain)` and selected by a 64-bit stream index. ChaCha is
//! counter based, so stream `i` does not depend on how many values other
//! streams consumed, which keeps parallel runs bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose of a stream. Distinct domains never share a key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Episode,
    AttReplica,
    Generator,
    Diagnostic,
    BallsAndBins,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Episode => 0x45_50_49_53,
            Domain::AttReplica => 0x41_54_54_52,
            Domain::Generator => 0x47_45_4e_52,
            Domain::Diagnostic => 0x44_49_41_47,
            Domain::BallsAndBins => 0x42_42_49_4e,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine a master seed and a stream id into one 64-bit value.
pub fn stream_seed(master_seed: u64, stream_id: u64) -> u64 {
    mix64(master_seed ^ mix64(stream_id.wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// The generator for stream `index` of `domain` under `master_seed`.
pub fn stream(master_seed: u64, domain: Domain, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(master_seed, domain.tag()));
    rng.set_stream(index);
    rng
}
