#![allow(dead_code)]

use pplab::geometry::{qubit_projector, Outcome};
use pplab::random;
use pplab::Projector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` random rank-1 qubit projectors.
pub fn qubit_projectors(r: &mut ChaCha8Rng, n: usize) -> Vec<Projector> {
    (0..n)
        .map(|_| qubit_projector(random::unit_vector(r), Outcome::Plus))
        .collect()
}
