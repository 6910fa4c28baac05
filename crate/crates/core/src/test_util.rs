//! Shared helpers for unit tests.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;

/// Dense matrix with entries uniform in the complex square `[-1, 1]^2`.
pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        )
    })
    .expect("random entries are finite")
}

pub(crate) fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> ComplexMatrix {
    random_matrix(rng, len, 1)
}
