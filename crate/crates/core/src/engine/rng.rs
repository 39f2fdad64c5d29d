//! Counter-addressed random streams.
//!
//! Time is cut into fixed blocks of [`RNG_BLOCK`] steps. Block `k` owns two
//! ChaCha8 streams (one for `M`, one for `Q`) selected by `set_stream`, so any
//! step is reachable by keying its block and replaying at most one block of
//! draws. The block size is an internal constant and does not depend on how
//! the caller chunks the trajectory.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const RNG_BLOCK: u64 = 4096;

/// The pair of streams feeding one step.
pub struct Noise {
    pub m: ChaCha8Rng,
    pub q: ChaCha8Rng,
}

impl Noise {
    pub fn for_block(seed: u64, block: u64) -> Self {
        let mut m = ChaCha8Rng::seed_from_u64(seed);
        let mut q = m.clone();
        m.set_stream(2 * block);
        q.set_stream(2 * block + 1);
        Noise { m, q }
    }
}

/// Replica `i` of a Monte Carlo loop gets its own stream.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    r.set_stream(replica);
    r
}

/// Walks global step indices, re-keying at block boundaries.
pub struct Cursor {
    seed: u64,
    step: u64,
    noise: Noise,
}

impl Cursor {
    /// Positioned at block start; the caller replays `step % RNG_BLOCK`
    /// steps to reach `step`.
    pub fn at_block_of(seed: u64, step: u64) -> Self {
        let block = step / RNG_BLOCK;
        Cursor {
            seed,
            step: block * RNG_BLOCK,
            noise: Noise::for_block(seed, block),
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Noise for the current step; advances the step counter.
    #[inline]
    pub fn next(&mut self) -> &mut Noise {
        if self.step % RNG_BLOCK == 0 && self.step > 0 {
            self.noise = Noise::for_block(self.seed, self.step / RNG_BLOCK);
        }
        self.step += 1;
        &mut self.noise
    }
}
