//! Analog beamforming weight synthesis for active sensing arrays.
//!
//! An analog (phase-shifter-only) array realizes a point spread function by
//! adding `Q` component images, one per transmit/receive phase-vector pair.
//! This crate provides the pieces needed to design such beamformers and to
//! validate them end to end:
//!
//! - [`linalg`]: complex Kronecker/Khatri-Rao products, SVD, pseudo-inverse,
//!   and the column-major vectorization convention everything relies on;
//! - [`mod@array`]: linear array geometries, steering vectors, sum co-arrays,
//!   measurement matrices, and Dolph-Chebyshev target patterns;
//! - [`factorize`]: the fully-digital SVD baseline (`Q_d = rank(W)`) and the
//!   closed-form analog factorization achieving `Q = 4 Q_d`;
//! - [`solver`]: gradient descent on unconstrained phase matrices for the
//!   fixed-`Q` PSF matching problem, plus the search for the smallest
//!   feasible `Q`;
//! - [`imaging`]: a sequential-scanning simulator that forms component images
//!   and composites them by image addition;
//! - [`batch`]: order-preserving parallel execution of independent solver
//!   runs (rayon-backed behind the default `parallel` feature).

pub mod array;
pub mod batch;
pub mod factorize;
pub mod imaging;
pub mod linalg;
pub mod solver;

mod seeding;
#[cfg(test)]
mod test_util;

pub use array::{
    chebyshev_target, chebyshev_window, measurement_matrix, sidelobe_peaks_db, steering,
    sum_coarray, AngleGrid, ArrayError, ArrayGeometry, PsfSpec,
};
pub use batch::{run_batch, run_batch_seq};
pub use factorize::{
    analog_factorize, digital_factorize, reconstruct, unit_modulus_split, AnalogFactorization,
    DigitalFactorization, FactorizeError, VectorSplit,
};
pub use imaging::{channel_matrix, measure, scan, CompositeImage, ImagingError, Scatterer, Scene};
pub use linalg::{
    default_rank_tol, khatri_rao, kronecker, matricize, pinv, svd, vectorize, ComplexMatrix,
    LinalgError, SvdResult,
};
pub use solver::{
    finite_diff_grad, grad_descent, grad_descent_traced, grad_j, minimize_q, objective,
    random_phase_init, solve_fixed_q, BeamformerSolution, SolverConfig, SolverError, SolverState,
    Tolerance,
};

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;
