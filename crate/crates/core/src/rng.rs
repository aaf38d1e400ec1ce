//! Every random stream derives from one user seed.
//!
//! A stream is ChaCha8 keyed by `seed` with stream id
//! `(purpose << 48) | counter`, so chains, replicates and population draws
//! never share a keystream and do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Chain = 1,
    Initialization = 2,
    Population = 3,
    Replicate = 4,
    Study = 5,
}

pub fn substream(seed: u64, purpose: Purpose, counter: u64) -> ChaCha8Rng {
    debug_assert!(counter < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | counter);
    rng
}
