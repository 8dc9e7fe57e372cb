//! Counter-based random streams and the ordered parallel trial runner.
//!
//! A stream is addressed by `(master_seed, stream_id, counter)`. The
//! generator is ChaCha8 keyed by the master seed, with the ChaCha stream
//! selector set to `stream_id` and the block position set to `counter`, so
//! any position of any stream can be reproduced without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// Number of low bits of a stream id reserved for the trial index.
const INDEX_BITS: u32 = 40;

/// Opens the stream `stream_id` of `master_seed` at word position `counter`.
pub fn stream(master_seed: u64, stream_id: u64, counter: u128) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng.set_word_pos(counter);
    rng
}

/// Stream id for item `index` of the experiment domain `domain`.
pub fn stream_id(domain: u64, index: u64) -> u64 {
    assert!(index < (1u64 << INDEX_BITS), "trial index {index} out of range");
    (domain << INDEX_BITS) | index
}

/// Domain tags keeping the streams of different experiments disjoint.
pub mod domain {
    pub const SAMPLE: u64 = 1;
    pub const SPECTRUM: u64 = 2;
    pub const CONDITIONAL_SPECTRUM: u64 = 3;
    pub const CODEBOOK: u64 = 4;
    pub const ENCODER: u64 = 5;
    pub const RELIABILITY: u64 = 6;
    pub const LEAKAGE: u64 = 7;
    pub const QN: u64 = 8;
    pub const GAUSS_INPUT: u64 = 9;
    pub const GAUSS_KSTAT: u64 = 10;
    pub const GAUSS_QN: u64 = 11;
    pub const NONSTATIONARY: u64 = 12;
    pub const ENSEMBLE: u64 = 13;
}

/// Master seed plus an optional cap on worker threads.
///
/// Trials run in parallel with one stream per trial and results are
/// collected in trial-index order, so the output does not depend on
/// `threads`.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarlo {
    pub seed: u64,
    pub threads: Option<usize>,
}

impl MonteCarlo {
    pub fn new(seed: u64) -> Self {
        Self { seed, threads: None }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads.max(1));
        self
    }

    /// A copy whose streams are disjoint from this one's (used when one
    /// experiment nests several Monte Carlo stages).
    pub fn fork(&self, salt: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(salt)),
            threads: self.threads,
        }
    }

    pub fn rng(&self, domain: u64, index: u64) -> StreamRng {
        stream(self.seed, stream_id(domain, index), 0)
    }

    /// Runs `trials` independent trials and returns their results in
    /// trial order.
    pub fn run<T, F>(&self, domain: u64, trials: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut StreamRng, usize) -> T + Sync + Send,
    {
        let body = || {
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = self.rng(domain, t as u64);
                    f(&mut rng, t)
                })
                .collect::<Vec<T>>()
        };
        match self.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool")
                .install(body),
            None => body(),
        }
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
