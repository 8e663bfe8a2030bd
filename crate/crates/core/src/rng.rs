//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a [`Stream`] obtained by
//! [`substream`]. A substream is a pure function of a master seed and a path
//! of integers (for instance `[tag, n_index, replicate]`), so results do not
//! depend on the order in which parallel workers pick up cells.
//!
//! Derivation: `s0 = mix(master)`, then for each path element `p`,
//! `s = mix(s ^ mix(p + GOLDEN))`, where `mix` is the SplitMix64 finalizer.
//! The final `s` seeds a ChaCha8 generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Domain tags keep substreams used for different purposes apart.
pub mod tags {
    pub const PATH: u64 = 1;
    pub const COUPLED: u64 = 2;
    pub const REFERENCE: u64 = 3;
    pub const RATE_CELL: u64 = 4;
    pub const EPS_DIFF_ORACLE: u64 = 5;
    pub const CF_DISTANCE: u64 = 6;
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a 64-bit seed from a master seed and a path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix(master), |s, &p| mix(s ^ mix(p.wrapping_add(GOLDEN))))
}

pub fn substream(master: u64, path: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
