//! Keyed random substreams.
//!
//! Every random quantity in a replication comes from its own ChaCha stream
//! whose key is derived from `(seed, agent id, purpose)`. Draws therefore
//! do not depend on the order in which agents are processed or on which
//! matching algorithm runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for. The tag value is part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    CaptureCost = 1,
    CaptureFraction = 2,
    StartYear = 3,
    Synthetic = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream for one `(seed, label, purpose)` key.
pub fn substream(seed: u64, label: &str, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed) ^ fnv1a64(label.as_bytes()).rotate_left(17) ^ (purpose as u64);
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    // the label length goes into the key too, so "ab"+"c" cannot alias "a"+"bc"
    let tail = splitmix64(label.len() as u64 ^ seed);
    for (k, t) in key[..8].iter_mut().zip(tail.to_le_bytes()) {
        *k ^= t;
    }
    ChaCha8Rng::from_seed(key)
}

/// Seed of replication `index` in a batch. Injective in `index`: both the
/// odd-multiplier offset and the splitmix finalizer are bijections on u64.
pub fn replication_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}
