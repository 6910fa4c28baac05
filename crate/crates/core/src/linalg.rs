//! Dense complex linear algebra primitives: Kronecker and Khatri-Rao products,
//! SVD, Moore-Penrose pseudo-inverse, and column-major vectorization.
//!
//! The vectorization convention throughout this crate is column-major:
//! `vectorize` stacks the columns of a matrix, so for an outer product
//! `vectorize(w_r * w_t^T) == kronecker(w_t, w_r)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Errors from linear algebra operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix entries must be finite (found NaN or infinity)")]
    NonFinite,
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("column counts must match: left has {left}, right has {right}")]
    ColumnCountMismatch { left: usize, right: usize },
    #[error("expected a column vector, got a {rows}x{cols} matrix")]
    NotColumnVector { rows: usize, cols: usize },
}

/// Dense complex-valued matrix, the universal numeric carrier of the crate.
///
/// Entries are stored column-major and are guaranteed finite by the fallible
/// constructors. Zero-dimensional matrices are permitted so that degenerate
/// factorizations (zero components) remain representable.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from column-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::LengthMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self {
            inner: DMatrix::from_vec(rows, cols, entries),
        })
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self, LinalgError> {
        let inner = DMatrix::from_fn(rows, cols, f);
        if !inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { inner })
    }

    /// Builds a column vector from a slice of entries.
    pub fn column_vector(entries: &[Complex64]) -> Result<Self, LinalgError> {
        Self::new(entries.len(), 1, entries.to_vec())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::from_element(rows, cols, Complex64::new(1.0, 0.0)),
        }
    }

    /// Elementwise `exp(j * phase)`; every entry of the result has unit modulus.
    ///
    /// Panics if any phase is not finite.
    pub fn from_phases(phases: &DMatrix<f64>) -> Self {
        assert!(
            phases.iter().all(|p| p.is_finite()),
            "phase matrix must be finite"
        );
        Self {
            inner: phases.map(|p| Complex64::new(p.cos(), p.sin())),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    /// Entry count; for column vectors this is the vector length.
    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    /// Column-major slice of the entries.
    pub fn as_slice(&self) -> &[Complex64] {
        self.inner.as_slice()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.inner.iter()
    }

    /// Copy of column `j` as a column vector.
    pub fn column(&self, j: usize) -> Self {
        Self {
            inner: DMatrix::from_column_slice(self.rows(), 1, self.inner.column(j).as_slice()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            inner: self.inner.map(|z| z.conj()),
        }
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(LinalgError::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self {
            inner: self.inner.component_mul(&other.inner),
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            inner: self.inner.map(|z| z * s),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Largest entry modulus (the elementwise infinity norm).
    pub fn max_modulus(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Elementwise argument in `(-pi, pi]`.
    pub fn phase_angles(&self) -> DMatrix<f64> {
        self.inner.map(|z| z.arg())
    }

    pub fn real(&self) -> DMatrix<f64> {
        self.inner.map(|z| z.re)
    }

    pub fn imag(&self) -> DMatrix<f64> {
        self.inner.map(|z| z.im)
    }

    pub fn is_finite(&self) -> bool {
        self.inner
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn inner(&self) -> &DMatrix<Complex64> {
        &self.inner
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, index: (usize, usize)) -> &Complex64 {
        &self.inner[index]
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

/// Singular value decomposition `M = U * diag(s) * V^H` with `s` descending
/// and `U`, `V` having orthonormal columns.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl SvdResult {
    /// Number of singular values strictly above `rank_tol * s_max`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let s_max = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > rank_tol * s_max)
            .count()
    }
}

/// Standard rank cutoff `max(rows, cols) * machine epsilon`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Kronecker product: block `(i, j)` of the result equals `a[(i, j)] * b`.
pub fn kronecker(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = (a.rows(), a.cols());
    let (br, bc) = (b.rows(), b.cols());
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for aj in 0..ac {
        for ai in 0..ar {
            let a_val = a[(ai, aj)];
            for bj in 0..bc {
                for bi in 0..br {
                    out[(ai * br + bi, aj * bc + bj)] = a_val * b[(bi, bj)];
                }
            }
        }
    }
    ComplexMatrix { inner: out }
}

/// Khatri-Rao product (column-wise Kronecker product).
///
/// Column `q` of the result is `kronecker(a_col_q, b_col_q)`; with the
/// column-major vectorization convention, `(F_t ⋄ F_r) c` equals
/// `vectorize(sum_q c_q f_{r,q} f_{t,q}^T)` for `a = F_t`, `b = F_r`.
pub fn khatri_rao(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if a.cols() != b.cols() {
        return Err(LinalgError::ColumnCountMismatch {
            left: a.cols(),
            right: b.cols(),
        });
    }
    let (ar, br, q) = (a.rows(), b.rows(), a.cols());
    let mut out = DMatrix::zeros(ar * br, q);
    for col in 0..q {
        for ai in 0..ar {
            let a_val = a[(ai, col)];
            for bi in 0..br {
                out[(ai * br + bi, col)] = a_val * b[(bi, col)];
            }
        }
    }
    Ok(ComplexMatrix { inner: out })
}

/// Thin SVD with singular values sorted in descending order.
///
/// Uses one-sided (Hestenes) Jacobi rotations, which orthogonalize the
/// columns in place; for the small dense matrices this crate works with the
/// method is both fast and accurate to a few ulps.
pub fn svd(m: &ComplexMatrix) -> SvdResult {
    if m.rows() == 0 || m.cols() == 0 {
        return SvdResult {
            u: ComplexMatrix::zeros(m.rows(), 0),
            singular_values: Vec::new(),
            v: ComplexMatrix::zeros(m.cols(), 0),
        };
    }
    if m.cols() > m.rows() {
        // Orthogonalizing columns wants a tall matrix; factor the adjoint and
        // swap the roles of U and V.
        let swapped = jacobi_svd(&m.inner.adjoint());
        return SvdResult {
            u: ComplexMatrix { inner: swapped.2 },
            singular_values: swapped.1,
            v: ComplexMatrix { inner: swapped.0 },
        };
    }
    let (u, sv, v) = jacobi_svd(&m.inner);
    SvdResult {
        u: ComplexMatrix { inner: u },
        singular_values: sv,
        v: ComplexMatrix { inner: v },
    }
}

/// One-sided Jacobi SVD of a tall matrix (`rows >= cols`): returns
/// `(U, sigma, V)` with `A = U diag(sigma) V^H`, sigma descending, and both
/// factors having orthonormal columns (including columns paired with zero
/// singular values, which are completed from the canonical basis).
fn jacobi_svd(a: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>) {
    let (rows, cols) = (a.nrows(), a.ncols());
    debug_assert!(rows >= cols);
    let mut work = a.clone();
    let mut v = DMatrix::<Complex64>::identity(cols, cols);
    let tol = 1e-15;
    let max_sweeps = 64;

    for _ in 0..max_sweeps {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let col_i = work.column(i);
                let col_j = work.column(j);
                let alpha: f64 = col_i.iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = col_j.iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = col_i
                    .iter()
                    .zip(col_j.iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let scale = (alpha * beta).sqrt();
                if scale == 0.0 || gamma.norm() <= tol * scale {
                    continue;
                }
                rotated = true;
                // Factor out the phase of gamma so the 2x2 Gram matrix is
                // real, then apply the classical Jacobi rotation.
                let phase = gamma / gamma.norm();
                let tau = (beta - alpha) / (2.0 * gamma.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let phase_conj = phase.conj();
                for row in 0..rows {
                    let x = work[(row, i)];
                    let y = work[(row, j)] * phase_conj;
                    work[(row, i)] = c * x - s * y;
                    work[(row, j)] = s * x + c * y;
                }
                for row in 0..cols {
                    let x = v[(row, i)];
                    let y = v[(row, j)] * phase_conj;
                    v[(row, i)] = c * x - s * y;
                    v[(row, j)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| work.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut u = DMatrix::<Complex64>::zeros(rows, cols);
    let mut v_sorted = DMatrix::<Complex64>::zeros(cols, cols);
    let mut sv = Vec::with_capacity(cols);
    let sigma_max = norms[order[0]];
    for (filled, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        sv.push(sigma);
        v_sorted.set_column(filled, &v.column(src));
        if sigma > sigma_max * f64::EPSILON && sigma > 0.0 {
            let col = work.column(src) / Complex64::new(sigma, 0.0);
            u.set_column(filled, &col);
        }
    }
    complete_orthonormal_columns(&mut u, &sv, sigma_max);
    (u, sv, v_sorted)
}

/// Replaces columns whose singular value collapsed to (numerical) zero with
/// canonical-basis vectors orthogonalized against the accepted columns, so
/// `U^H U = I` holds even for rank-deficient inputs.
///
/// Each completion picks the canonical vector whose projection residual is
/// largest; the residual of the best candidate is always at least
/// `sqrt((rows - filled) / rows)`, so normalization is safe.
fn complete_orthonormal_columns(u: &mut DMatrix<Complex64>, sv: &[f64], sigma_max: f64) {
    let (rows, cols) = (u.nrows(), u.ncols());
    let is_zero = |j: usize| sv[j] <= sigma_max * f64::EPSILON || sv[j] == 0.0;
    for j in 0..cols {
        if !is_zero(j) {
            continue;
        }
        let orthogonalized = |candidate: usize| {
            let mut col = vec![Complex64::new(0.0, 0.0); rows];
            col[candidate] = Complex64::new(1.0, 0.0);
            for k in 0..cols {
                if k == j || (is_zero(k) && k > j) {
                    continue;
                }
                let proj: Complex64 = (0..rows).map(|r| u[(r, k)].conj() * col[r]).sum();
                for (r, entry) in col.iter_mut().enumerate() {
                    *entry -= proj * u[(r, k)];
                }
            }
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (col, norm)
        };
        let best = (0..rows)
            .map(orthogonalized)
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .expect("rows >= 1");
        let (col, norm) = best;
        for (r, entry) in col.iter().enumerate() {
            u[(r, j)] = entry / Complex64::new(norm, 0.0);
        }
    }
}

/// Moore-Penrose pseudo-inverse via SVD.
///
/// Singular values at or below `rank_tol * s_max` are treated as zero; a zero
/// matrix yields a zero matrix of transposed shape.
pub fn pinv(m: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    if m.rows() == 0 || m.cols() == 0 {
        return ComplexMatrix::zeros(m.cols(), m.rows());
    }
    let decomp = svd(m);
    let s_max = decomp.singular_values.first().copied().unwrap_or(0.0);
    let threshold = rank_tol * s_max;
    let k = decomp.singular_values.len();
    let mut sigma_inv = DMatrix::<Complex64>::zeros(k, k);
    for (i, &s) in decomp.singular_values.iter().enumerate() {
        if s > threshold {
            sigma_inv[(i, i)] = Complex64::new(1.0 / s, 0.0);
        }
    }
    ComplexMatrix {
        inner: decomp.v.inner() * sigma_inv * decomp.u.inner().adjoint(),
    }
}

/// Column-major vectorization: stacks the columns of `m` into a column vector.
pub fn vectorize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        inner: DMatrix::from_column_slice(m.len(), 1, m.as_slice()),
    }
}

/// Inverse of [`vectorize`]: reshapes a column vector into a `rows x cols`
/// matrix, filling column by column.
pub fn matricize(
    v: &ComplexMatrix,
    rows: usize,
    cols: usize,
) -> Result<ComplexMatrix, LinalgError> {
    if v.cols() != 1 {
        return Err(LinalgError::NotColumnVector {
            rows: v.rows(),
            cols: v.cols(),
        });
    }
    if v.rows() != rows * cols {
        return Err(LinalgError::LengthMismatch {
            expected: rows * cols,
            got: v.rows(),
        });
    }
    Ok(ComplexMatrix {
        inner: DMatrix::from_column_slice(rows, cols, v.as_slice()),
    })
}
