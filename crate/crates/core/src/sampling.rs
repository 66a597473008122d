//! Seeded random instances.
//!
//! Every trial gets its own ChaCha stream derived from `(seed, trial)`, so a
//! single trial can be replayed without regenerating the ones before it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{pair_count, GhostWeightVector, ModelSpec, PairOrder};

/// Largest numerator drawn for `t - 1`.
pub const MAX_NUMERATOR: u64 = 1 << 16;
/// Largest denominator drawn for `t - 1`.
pub const MAX_DENOMINATOR: u64 = 1 << 8;
/// Upper end of the uniform range for float-mode couplings and fields.
pub const MAX_PHYSICAL: f64 = 1.5;

/// The random stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `t = 1 + num/den` with `num ∈ [0, 2^16]`, `den ∈ [1, 2^8]`.
pub fn random_weight<R: Rng + ?Sized>(rng: &mut R) -> BigRational {
    let num = rng.gen_range(0..=MAX_NUMERATOR);
    let den = rng.gen_range(1..=MAX_DENOMINATOR);
    BigRational::one() + BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A ferromagnetic exact instance with every pair weight drawn independently.
pub fn random_weights<R: Rng + ?Sized>(
    n_sites: usize,
    n_states: u32,
    rng: &mut R,
) -> Result<GhostWeightVector> {
    let weights = (0..pair_count(n_sites)).map(|_| random_weight(rng)).collect();
    GhostWeightVector::new(n_sites, n_states, weights)
}

/// A physical instance with all couplings and fields uniform in
/// `[0, MAX_PHYSICAL)`.
pub fn random_physical_model<R: Rng + ?Sized>(
    n_sites: usize,
    n_states: u32,
    rng: &mut R,
) -> Result<ModelSpec> {
    let mut fields = Vec::with_capacity(n_sites);
    let mut couplings = Vec::new();
    for (i, j) in PairOrder::new(n_sites)?.iter() {
        let value = rng.gen_range(0.0..MAX_PHYSICAL);
        if i == 0 {
            fields.push(value);
        } else {
            couplings.push(((i, j), value));
        }
    }
    ModelSpec::new(n_sites, n_states, couplings, fields)
}
