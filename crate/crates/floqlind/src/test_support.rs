//! Random fixtures shared by unit tests.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::lindblad::lindbladian_superop;
use crate::linalg::{dagger, C64};

pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Array2<C64> {
    let a = random_matrix(rng, n);
    (&a + &dagger(&a)).mapv(|z| z * C64::new(0.5, 0.0))
}

/// Random qubit Lindbladian with a Hermitian part and two dissipators.
pub(crate) fn random_lindbladian(rng: &mut ChaCha8Rng, dim: usize) -> Array2<C64> {
    let h = random_hermitian(rng, dim);
    let jumps = vec![random_matrix(rng, dim), random_matrix(rng, dim)];
    let rates = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
    lindbladian_superop(&h, &jumps, &rates).unwrap()
}
