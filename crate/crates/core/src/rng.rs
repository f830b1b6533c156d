//! Seeded randomness.
//!
//! All randomness comes from ChaCha8 seeded with `SimConfig::rng_seed`, using a
//! separate stream per purpose. The generator and its stream layout are part
//! of the reproducibility contract: the same seed replays the same run on any
//! platform and build.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
