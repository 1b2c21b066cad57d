//! Deterministic random sub-streams.
//!
//! Every random draw in a simulation comes from a stream keyed by
//! `(root seed, scope, index, consumer)`. A scope is typically a grid point
//! and an index a trial number, so the same trial sees the same θ, sensing
//! errors, fading and noise no matter which fusion rules are evaluated or in
//! what order trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The independent consumers of randomness inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Consumer {
    Theta = 0,
    Sensing = 1,
    Fading = 2,
    Noise = 3,
    Profiles = 4,
}

/// Scope reserved for per-scenario draws such as the sensor error bounds.
pub const SCENARIO_SCOPE: u64 = u64::MAX;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a root seed with a scope and an index into a 64-bit stream key.
pub fn derive_key(seed: u64, scope: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(scope ^ splitmix64(index)))
}

/// Open the stream for `consumer` under the given key coordinates.
pub fn substream(seed: u64, scope: u64, index: u64, consumer: Consumer) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, scope, index));
    rng.set_stream(consumer as u64);
    rng
}

/// The four per-trial streams.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    pub theta: ChaCha8Rng,
    pub sensing: ChaCha8Rng,
    pub fading: ChaCha8Rng,
    pub noise: ChaCha8Rng,
}

impl TrialStreams {
    pub fn new(seed: u64, grid_index: u64, trial_index: u64) -> Self {
        let base = ChaCha8Rng::seed_from_u64(derive_key(seed, grid_index, trial_index));
        let open = |consumer: Consumer| {
            let mut rng = base.clone();
            rng.set_stream(consumer as u64);
            rng
        };
        Self {
            theta: open(Consumer::Theta),
            sensing: open(Consumer::Sensing),
            fading: open(Consumer::Fading),
            noise: open(Consumer::Noise),
        }
    }
}
