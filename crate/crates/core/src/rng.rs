//! Reproducible randomness.
//!
//! Every ensemble member draws from its own ChaCha8 stream (a portable,
//! platform-independent generator) seeded with [`derive_seed`] of the
//! master seed and the instance index. Gaussian variates use the Box–Muller
//! transform so that draws do not depend on any library's sampling
//! algorithm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StdRng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of instance `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(
        mix64(master.wrapping_add(0x9e37_79b9_7f4a_7c15))
            ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03),
    )
}

pub fn rng_from_seed(seed: u64) -> StdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two independent standard normal variates.
pub fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // u1 in (0, 1] keeps the logarithm finite
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    (r * phi.cos(), r * phi.sin())
}
