//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use stabscope_core::rng::{gaussian_pair, rng_from_seed};
use stabscope_core::StateVector;

/// Normalized complex Gaussian state, a function of `seed` only.
pub fn random_state(n: usize, seed: u64) -> StateVector {
    let mut rng = rng_from_seed(seed);
    let amps = (0..1usize << n)
        .map(|_| {
            let (a, b) = gaussian_pair(&mut rng);
            Complex64::new(a, b)
        })
        .collect();
    let mut s = StateVector::from_amplitudes_unchecked(n, amps).expect("n within dense limit");
    s.normalize().expect("nonzero Gaussian vector");
    s
}
