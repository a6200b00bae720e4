// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded random streams and a deterministic parallel replicate driver.
//!
//! Every unit of work (a chunk of replicates, one conditioning draw, one
//! original sample) gets its own ChaCha stream selected by `(seed, tag,
//! index)`. Work is split into fixed-size chunks whose results are collected
//! in index order, so the output is bit-identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Rng = ChaCha8Rng;

/// Replicates per chunk in [`par_chunks`].
pub const CHUNK: usize = 4096;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for a named purpose.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    tag.bytes()
        .fold(splitmix64(seed), |acc, b| splitmix64(acc ^ u64::from(b)))
}

/// The generator for work item `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `total` replicates in chunks of [`CHUNK`], each chunk with its own
/// stream, and returns the per-chunk results in chunk order.
pub fn par_chunks<T, F>(total: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, usize) -> T + Sync,
{
    let n_chunks = total.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(total - c * CHUNK);
            let mut rng = stream(seed, c as u64);
            f(&mut rng, len)
        })
        .collect()
}

/// Maps `f` over `0..count`, giving item `i` the stream `(seed, i)`.
pub fn par_items<T, F>(count: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, usize) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            f(&mut rng, i)
        })
        .collect()
}

/// Element-wise sum of per-chunk tallies, in order.
pub fn sum_counts(parts: Vec<Vec<u64>>, width: usize) -> Vec<u64> {
    let mut out = vec![0u64; width];
    for part in parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out
}
