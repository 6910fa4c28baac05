//! Gradient descent on the unconstrained phase parameterization of the
//! fixed-`Q` PSF matching problem, plus the outer loop that searches for the
//! smallest `Q` meeting the tolerance.
//!
//! The objective is `J(Phi_t, Phi_r) = ||(I - K K^+) psi||^2` with
//! `K = A (F_t ⋄ F_r)` and `F_x = exp(j Phi_x)`; the digital gains are
//! eliminated through the least-squares solution `c = K^+ psi`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::batch::run_batch;
use crate::factorize::AnalogFactorization;
use crate::linalg::{default_rank_tol, khatri_rao, matricize, pinv, ComplexMatrix};
use crate::seeding::mix_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("measurement matrix has {a_cols} columns but F_t/F_r imply {nt}x{nr} elements")]
    MeasurementShapeMismatch { a_cols: usize, nt: usize, nr: usize },
    #[error("F_t has {ft_cols} columns but F_r has {fr_cols}")]
    ComponentCountMismatch { ft_cols: usize, fr_cols: usize },
    #[error("target vector has {psi_rows} entries but the measurement matrix has {a_rows} rows")]
    TargetLengthMismatch { psi_rows: usize, a_rows: usize },
    #[error("initial phase matrices must be unit modulus")]
    NotUnitModulus,
    #[error("objective or gradient became non-finite at iteration {iteration} (step size {step_size:e})")]
    NonFinite { iteration: usize, step_size: f64 },
    #[error("solver configuration is invalid: {0}")]
    BadConfig(String),
}

/// Convergence tolerance, either absolute in the units of `||psi||_2` or
/// relative to the target norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    RelativeToTargetNorm(f64),
}

impl Tolerance {
    /// Resolves to an absolute residual threshold for a target of norm
    /// `target_norm`.
    pub fn absolute(&self, target_norm: f64) -> f64 {
        match *self {
            Tolerance::Absolute(eps) => eps,
            Tolerance::RelativeToTargetNorm(rel) => rel * target_norm,
        }
    }
}

/// Gradient descent settings. The defaults are the reference experiment
/// values: step size `1e-3`, `1e4` iterations, tolerance `1e-4 * ||psi||_2`,
/// a single random initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub step_size: f64,
    pub max_iters: usize,
    pub tolerance: Tolerance,
    pub restarts: usize,
    pub seed: u64,
    /// Pseudo-inverse rank cutoff; `None` uses `max(rows, cols) * eps`.
    pub rank_tol: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_size: 1e-3,
            max_iters: 10_000,
            tolerance: Tolerance::RelativeToTargetNorm(1e-4),
            restarts: 1,
            seed: 0,
            rank_tol: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolverError> {
        if self.step_size <= 0.0 || !self.step_size.is_finite() {
            return Err(SolverError::BadConfig(format!(
                "step size must be positive and finite, got {}",
                self.step_size
            )));
        }
        if self.max_iters == 0 {
            return Err(SolverError::BadConfig(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(SolverError::BadConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Iteration state exposed to observers of [`grad_descent_traced`].
#[derive(Debug, Clone)]
pub struct SolverState {
    pub phi_t: DMatrix<f64>,
    pub phi_r: DMatrix<f64>,
    pub f_t: ComplexMatrix,
    pub f_r: ComplexMatrix,
    /// `A (F_t ⋄ F_r)`, refreshed after every phase update.
    pub k: ComplexMatrix,
    /// Residual `||psi - K c||_2` at this iterate.
    pub residual: f64,
    pub iteration: usize,
}

/// Output of a solver run: the analog factorization with `c_t = 1_Q` and
/// `c_r = K^+ psi`, plus convergence diagnostics.
#[derive(Debug, Clone)]
pub struct BeamformerSolution {
    pub factorization: AnalogFactorization,
    /// Achieved residual `||psi - K c_r||_2`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual after each iteration, starting with the initial point.
    pub residual_history: Vec<f64>,
    /// Seed of the random stream that produced the initial phases.
    pub seed: u64,
}

impl BeamformerSolution {
    pub fn q(&self) -> usize {
        self.factorization.q()
    }
}

fn check_dims(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    f_t: &ComplexMatrix,
    f_r: &ComplexMatrix,
) -> Result<(), SolverError> {
    if f_t.cols() != f_r.cols() {
        return Err(SolverError::ComponentCountMismatch {
            ft_cols: f_t.cols(),
            fr_cols: f_r.cols(),
        });
    }
    if a.cols() != f_t.rows() * f_r.rows() {
        return Err(SolverError::MeasurementShapeMismatch {
            a_cols: a.cols(),
            nt: f_t.rows(),
            nr: f_r.rows(),
        });
    }
    if psi.rows() != a.rows() || psi.cols() != 1 {
        return Err(SolverError::TargetLengthMismatch {
            psi_rows: psi.rows(),
            a_rows: a.rows(),
        });
    }
    Ok(())
}

/// Least-squares pieces shared by the objective and the gradient:
/// `c = K^+ psi` and the signed residual `r = K c - psi`.
fn least_squares_parts(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    f_t: &ComplexMatrix,
    f_r: &ComplexMatrix,
    rank_tol: Option<f64>,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix), SolverError> {
    check_dims(a, psi, f_t, f_r)?;
    let k = a * &khatri_rao(f_t, f_r).expect("column counts checked above");
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(k.rows(), k.cols()));
    let c = &pinv(&k, tol) * psi;
    let residual = &(&k * &c) - psi;
    Ok((k, c, residual))
}

/// Objective `J = ||(I - K K^+) psi||^2`, the squared residual of `psi`
/// projected off the column space of `K`.
pub fn objective(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    f_t: &ComplexMatrix,
    f_r: &ComplexMatrix,
    rank_tol: Option<f64>,
) -> Result<f64, SolverError> {
    let (_, _, residual) = least_squares_parts(a, psi, f_t, f_r, rank_tol)?;
    Ok(residual.frobenius_norm().powi(2))
}

/// Gradient of `J` with respect to the phase matrices, `(grad_t, grad_r)`.
///
/// Exploits the block structure of the Khatri-Rao derivatives instead of
/// materializing them: with `r = K c - psi`, `Z = mat(A^T conj(r))`, the
/// columns are `grad_r[:, q] = -2 Im(f_{r,q} ∘ c_q Z f_{t,q})` and
/// `grad_t[:, q] = -2 Im(f_{t,q} ∘ c_q Z^T f_{r,q})`, which matches the
/// literal matrix-derivative assembly to rounding error.
pub fn grad_j(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    f_t: &ComplexMatrix,
    f_r: &ComplexMatrix,
    rank_tol: Option<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>), SolverError> {
    let (_, c, residual) = least_squares_parts(a, psi, f_t, f_r, rank_tol)?;
    Ok(gradient_from_parts(&a.transpose(), f_t, f_r, &c, &residual))
}

fn gradient_from_parts(
    a_transposed: &ComplexMatrix,
    f_t: &ComplexMatrix,
    f_r: &ComplexMatrix,
    c: &ComplexMatrix,
    residual: &ComplexMatrix,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (nt, nr, q) = (f_t.rows(), f_r.rows(), f_t.cols());
    let s = a_transposed * &residual.conjugate();
    let z = matricize(&s, nr, nt).expect("s has N_t * N_r entries");
    let z_t = z.transpose();

    let mut grad_t = DMatrix::<f64>::zeros(nt, q);
    let mut grad_r = DMatrix::<f64>::zeros(nr, q);
    for col in 0..q {
        let c_q = c[(col, 0)];
        let zf_t = &z * &f_t.column(col);
        let zf_r = &z_t * &f_r.column(col);
        for row in 0..nr {
            grad_r[(row, col)] = -2.0 * (f_r[(row, col)] * c_q * zf_t[(row, 0)]).im;
        }
        for row in 0..nt {
            grad_t[(row, col)] = -2.0 * (f_t[(row, col)] * c_q * zf_r[(row, 0)]).im;
        }
    }
    (grad_t, grad_r)
}

/// Central-difference approximation of the phase gradient, perturbing one
/// phase entry at a time; the independent oracle for [`grad_j`].
pub fn finite_diff_grad(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    f_t: &ComplexMatrix,
    f_r: &ComplexMatrix,
    h: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>), SolverError> {
    check_dims(a, psi, f_t, f_r)?;
    assert!(h > 0.0, "finite-difference step must be positive");
    let rotate = |m: &ComplexMatrix, row: usize, col: usize, delta: f64| {
        let mut phases = m.phase_angles();
        phases[(row, col)] += delta;
        ComplexMatrix::from_phases(&phases)
    };
    let diff = |which_t: bool| -> Result<DMatrix<f64>, SolverError> {
        let base = if which_t { f_t } else { f_r };
        let mut grad = DMatrix::<f64>::zeros(base.rows(), base.cols());
        for col in 0..base.cols() {
            for row in 0..base.rows() {
                let eval = |delta: f64| -> Result<f64, SolverError> {
                    let perturbed = rotate(base, row, col, delta);
                    if which_t {
                        objective(a, psi, &perturbed, f_r, None)
                    } else {
                        objective(a, psi, f_t, &perturbed, None)
                    }
                };
                grad[(row, col)] = (eval(h)? - eval(-h)?) / (2.0 * h);
            }
        }
        Ok(grad)
    };
    Ok((diff(true)?, diff(false)?))
}

/// Unit-modulus matrix `exp(j Phi)` with phases i.i.d. uniform on `[0, 2pi)`,
/// deterministic for a fixed seed.
pub fn random_phase_init(n: usize, q: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phases = DMatrix::<f64>::zeros(n, q);
    for col in 0..q {
        for row in 0..n {
            phases[(row, col)] = rng.random::<f64>() * TAU;
        }
    }
    ComplexMatrix::from_phases(&phases)
}

/// Fixed-`Q` gradient descent from the given initial phase matrices.
///
/// Per iteration the shared least-squares pieces are computed once, both
/// phase matrices step along their gradients, then `K` and the residual are
/// refreshed. The loop stops when the residual reaches the tolerance or the
/// iteration cap; a realizable target therefore returns at iteration 0 with
/// the initial phases.
pub fn grad_descent(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    f_t0: &ComplexMatrix,
    f_r0: &ComplexMatrix,
    cfg: &SolverConfig,
) -> Result<BeamformerSolution, SolverError> {
    grad_descent_impl(a, psi, f_t0, f_r0, cfg, &mut |_| {})
}

/// [`grad_descent`] with an observer invoked at the initial point and after
/// every iteration.
pub fn grad_descent_traced(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    f_t0: &ComplexMatrix,
    f_r0: &ComplexMatrix,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&SolverState),
) -> Result<BeamformerSolution, SolverError> {
    grad_descent_impl(a, psi, f_t0, f_r0, cfg, &mut observer)
}

fn grad_descent_impl(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    f_t0: &ComplexMatrix,
    f_r0: &ComplexMatrix,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&SolverState),
) -> Result<BeamformerSolution, SolverError> {
    cfg.validate()?;
    check_dims(a, psi, f_t0, f_r0)?;
    let unit = f_t0
        .iter()
        .chain(f_r0.iter())
        .all(|z| (z.norm() - 1.0).abs() <= 1e-12);
    if !unit {
        return Err(SolverError::NotUnitModulus);
    }

    let q = f_t0.cols();
    let eps_max = cfg.tolerance.absolute(psi.frobenius_norm());
    let a_transposed = a.transpose();
    let tol = cfg
        .rank_tol
        .unwrap_or_else(|| default_rank_tol(a.rows(), q));

    let mut phi_t = f_t0.phase_angles();
    let mut phi_r = f_r0.phase_angles();
    let mut f_t = f_t0.clone();
    let mut f_r = f_r0.clone();

    let project = |f_t: &ComplexMatrix, f_r: &ComplexMatrix| {
        let k = a * &khatri_rao(f_t, f_r).expect("component counts match");
        let c = &pinv(&k, tol) * psi;
        let residual = &(&k * &c) - psi;
        let eps = residual.frobenius_norm();
        (k, c, residual, eps)
    };

    let (mut k, mut c, mut residual, mut eps) = project(&f_t, &f_r);
    let mut iteration = 0usize;
    let mut history = vec![eps];
    macro_rules! observe {
        () => {
            observer(&SolverState {
                phi_t: phi_t.clone(),
                phi_r: phi_r.clone(),
                f_t: f_t.clone(),
                f_r: f_r.clone(),
                k: k.clone(),
                residual: eps,
                iteration,
            })
        };
    }
    observe!();

    while iteration < cfg.max_iters && eps > eps_max {
        let (grad_t, grad_r) = gradient_from_parts(&a_transposed, &f_t, &f_r, &c, &residual);
        if !grad_t.iter().all(|g| g.is_finite()) || !grad_r.iter().all(|g| g.is_finite()) {
            return Err(SolverError::NonFinite {
                iteration,
                step_size: cfg.step_size,
            });
        }
        phi_t -= cfg.step_size * &grad_t;
        phi_r -= cfg.step_size * &grad_r;
        f_t = ComplexMatrix::from_phases(&phi_t);
        f_r = ComplexMatrix::from_phases(&phi_r);

        let refreshed = project(&f_t, &f_r);
        k = refreshed.0;
        c = refreshed.1;
        residual = refreshed.2;
        eps = refreshed.3;
        if !eps.is_finite() {
            return Err(SolverError::NonFinite {
                iteration,
                step_size: cfg.step_size,
            });
        }
        iteration += 1;
        history.push(eps);
        observe!();
    }

    let converged = eps <= eps_max;
    let c_t = vec![Complex64::new(1.0, 0.0); q];
    let c_r: Vec<Complex64> = (0..q).map(|i| c[(i, 0)]).collect();
    let factorization =
        AnalogFactorization::new(f_t, f_r, c_t, c_r).expect("phases stay unit modulus");
    Ok(BeamformerSolution {
        factorization,
        residual: eps,
        iterations: iteration,
        converged,
        residual_history: history,
        seed: cfg.seed,
    })
}

/// Runs `cfg.restarts` random initializations of [`grad_descent`] at a fixed
/// `Q` for a `nt`-element transmit and `nr`-element receive array. Converged
/// runs win by lowest residual (earliest restart on ties); otherwise the
/// lowest-residual attempt is returned unconverged.
///
/// Restarts are independent and run through [`run_batch`], so they execute in
/// parallel when the `parallel` feature is enabled; results merge in restart
/// order either way.
pub fn solve_fixed_q(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    nt: usize,
    nr: usize,
    q: usize,
    cfg: &SolverConfig,
) -> Result<BeamformerSolution, SolverError> {
    cfg.validate()?;
    if a.cols() != nt * nr {
        return Err(SolverError::MeasurementShapeMismatch {
            a_cols: a.cols(),
            nt,
            nr,
        });
    }

    let attempts: Vec<u64> = (0..cfg.restarts)
        .map(|restart| mix_seed(cfg.seed, q as u64, restart as u64))
        .collect();
    let results: Vec<Result<BeamformerSolution, SolverError>> = run_batch(attempts, |seed| {
        let f_t0 = random_phase_init(nt, q, seed);
        let f_r0 = random_phase_init(nr, q, mix_seed(seed, 1, 0));
        let mut run_cfg = cfg.clone();
        run_cfg.seed = seed;
        grad_descent(a, psi, &f_t0, &f_r0, &run_cfg)
    });

    let mut best: Option<BeamformerSolution> = None;
    for result in results {
        let solution = result?;
        let better = match &best {
            None => true,
            Some(current) => {
                (solution.converged && !current.converged)
                    || (solution.converged == current.converged
                        && solution.residual < current.residual)
            }
        };
        if better {
            best = Some(solution);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Searches `Q = 1, 2, ..., q_max` for the smallest component count whose
/// best restart converges; if none does, returns the overall lowest-residual
/// solution with `converged = false`.
pub fn minimize_q(
    a: &ComplexMatrix,
    psi: &ComplexMatrix,
    nt: usize,
    nr: usize,
    q_max: usize,
    cfg: &SolverConfig,
) -> Result<BeamformerSolution, SolverError> {
    if q_max == 0 {
        return Err(SolverError::BadConfig("q_max must be at least 1".into()));
    }
    let mut best: Option<BeamformerSolution> = None;
    for q in 1..=q_max {
        let solution = solve_fixed_q(a, psi, nt, nr, q, cfg)?;
        if solution.converged {
            return Ok(solution);
        }
        let better = best
            .as_ref()
            .map(|b| solution.residual < b.residual)
            .unwrap_or(true);
        if better {
            best = Some(solution);
        }
    }
    Ok(best.expect("q_max >= 1"))
}
