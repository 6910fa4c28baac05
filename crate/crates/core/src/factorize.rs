//! Co-array weight matrix factorizations: the fully-digital SVD baseline and
//! the closed-form fully-analog factorization that realizes any rank-`Q_d`
//! matrix with `4 * Q_d` unit-modulus components.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{default_rank_tol, svd, ComplexMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorizeError {
    #[error("expected a column vector, got a {rows}x{cols} matrix")]
    NotColumnVector { rows: usize, cols: usize },
    #[error("phase matrices must have unit-modulus entries (deviation {deviation:.3e})")]
    NotUnitModulus { deviation: f64 },
    #[error("factor shapes are inconsistent: F_t is {ft_rows}x{ft_cols}, F_r is {fr_rows}x{fr_cols}, gains have length {ct_len}/{cr_len}")]
    ShapeMismatch {
        ft_rows: usize,
        ft_cols: usize,
        fr_rows: usize,
        fr_cols: usize,
        ct_len: usize,
        cr_len: usize,
    },
}

/// Fully-digital factorization `W = sum_q w_{r,q} w_{t,q}^T` with
/// `Q_d = rank(W)` components.
#[derive(Debug, Clone)]
pub struct DigitalFactorization {
    tx_weights: Vec<ComplexMatrix>,
    rx_weights: Vec<ComplexMatrix>,
    nt: usize,
    nr: usize,
}

impl DigitalFactorization {
    pub fn count(&self) -> usize {
        self.tx_weights.len()
    }

    /// Transmit weight vectors `w_{t,q}`, each `N_t x 1`.
    pub fn tx_weights(&self) -> &[ComplexMatrix] {
        &self.tx_weights
    }

    /// Receive weight vectors `w_{r,q}`, each `N_r x 1`.
    pub fn rx_weights(&self) -> &[ComplexMatrix] {
        &self.rx_weights
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    /// Sum of the component outer products.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut w = ComplexMatrix::zeros(self.nr, self.nt);
        for (wt, wr) in self.tx_weights.iter().zip(&self.rx_weights) {
            w = &w + &(wr * &wt.transpose());
        }
        w
    }
}

/// Fully-analog factorization `W = F_r diag(c_t ∘ c_r) F_t^T` where every
/// entry of the phase matrices has unit modulus.
#[derive(Debug, Clone)]
pub struct AnalogFactorization {
    /// `N_t x Q` transmit phase matrix.
    pub f_t: ComplexMatrix,
    /// `N_r x Q` receive phase matrix.
    pub f_r: ComplexMatrix,
    /// Digital transmit gains, length `Q`.
    pub c_t: Vec<Complex64>,
    /// Digital receive gains, length `Q`.
    pub c_r: Vec<Complex64>,
    /// True when any component came from a zero digital weight vector.
    pub degenerate: bool,
}

impl AnalogFactorization {
    /// Validates unit-modulus phases (within 1e-12) and consistent shapes.
    pub fn new(
        f_t: ComplexMatrix,
        f_r: ComplexMatrix,
        c_t: Vec<Complex64>,
        c_r: Vec<Complex64>,
    ) -> Result<Self, FactorizeError> {
        let q = f_t.cols();
        if f_r.cols() != q || c_t.len() != q || c_r.len() != q {
            return Err(FactorizeError::ShapeMismatch {
                ft_rows: f_t.rows(),
                ft_cols: f_t.cols(),
                fr_rows: f_r.rows(),
                fr_cols: f_r.cols(),
                ct_len: c_t.len(),
                cr_len: c_r.len(),
            });
        }
        let deviation = f_t
            .iter()
            .chain(f_r.iter())
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if deviation > 1e-12 {
            return Err(FactorizeError::NotUnitModulus { deviation });
        }
        Ok(Self {
            f_t,
            f_r,
            c_t,
            c_r,
            degenerate: false,
        })
    }

    /// Number of component images.
    pub fn q(&self) -> usize {
        self.f_t.cols()
    }

    /// Effective per-component gains `c_t ∘ c_r`.
    pub fn gains(&self) -> Vec<Complex64> {
        self.c_t.iter().zip(&self.c_r).map(|(t, r)| t * r).collect()
    }

    /// Co-array weight matrix `F_r diag(c_t ∘ c_r) F_t^T`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        reconstruct(self)
    }
}

/// Result of splitting one complex vector into two unit-modulus phase vectors
/// and a shared gain: `gain * (phase_a + phase_b) == w`.
#[derive(Debug, Clone)]
pub struct VectorSplit {
    pub phase_a: ComplexMatrix,
    pub phase_b: ComplexMatrix,
    pub gain: f64,
    /// Set when `w` was identically zero; the phases are then all-ones.
    pub degenerate: bool,
}

/// SVD factorization of `W` into `rank(W)` rank-1 components.
///
/// The singular value is folded entirely into the receive weight: component
/// `q` has `w_{r,q} = s_q u_q` and `w_{t,q} = conj(v_q)`. `rank_tol` defaults
/// to `max(rows, cols) * eps`.
pub fn digital_factorize(w: &ComplexMatrix, rank_tol: Option<f64>) -> DigitalFactorization {
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(w.rows(), w.cols()));
    let decomp = svd(w);
    let rank = decomp.rank(tol);
    let mut tx = Vec::with_capacity(rank);
    let mut rx = Vec::with_capacity(rank);
    for q in 0..rank {
        let s = Complex64::new(decomp.singular_values[q], 0.0);
        rx.push(decomp.u.column(q).scale(s));
        tx.push(decomp.v.column(q).conjugate());
    }
    DigitalFactorization {
        tx_weights: tx,
        rx_weights: rx,
        nt: w.cols(),
        nr: w.rows(),
    }
}

/// Splits a complex vector `w` into two unit-modulus phase vectors and a gain
/// `||w||_inf / 2` such that `gain * (phase_a + phase_b) == w` entrywise.
///
/// The phases are `exp(j(angle(w) ± acos(|w| / ||w||_inf)))`; the acos
/// argument is clamped to `[0, 1]` to absorb floating-point overshoot at the
/// maximizing entry.
pub fn unit_modulus_split(w: &ComplexMatrix) -> Result<VectorSplit, FactorizeError> {
    if w.cols() != 1 {
        return Err(FactorizeError::NotColumnVector {
            rows: w.rows(),
            cols: w.cols(),
        });
    }
    let max_mod = w.max_modulus();
    if max_mod == 0.0 {
        return Ok(VectorSplit {
            phase_a: ComplexMatrix::ones(w.rows(), 1),
            phase_b: ComplexMatrix::ones(w.rows(), 1),
            gain: 0.0,
            degenerate: true,
        });
    }
    let phase = |sign: f64| {
        ComplexMatrix::from_fn(w.rows(), 1, |n, _| {
            let z = w[(n, 0)];
            let spread = (z.norm() / max_mod).clamp(0.0, 1.0).acos();
            let angle = z.arg() + sign * spread;
            Complex64::new(angle.cos(), angle.sin())
        })
        .expect("phases of a finite vector are finite")
    };
    Ok(VectorSplit {
        phase_a: phase(1.0),
        phase_b: phase(-1.0),
        gain: max_mod / 2.0,
        degenerate: false,
    })
}

/// Closed-form fully-analog factorization with `Q = 4 * Q_d` components.
///
/// Component `q` (1-based) uses digital component `q~ = ceil(q/4)` with sign
/// indices `i_r = ceil((1 + (q-1) mod 4) / 2)` and `i_t = 1 + (q-1) mod 2`,
/// so the four sign pairs per digital component appear in the order
/// `(+,+), (+,-), (-,+), (-,-)`. Gains are `||w_{x,q~}||_inf / 2` on both
/// sides.
pub fn analog_factorize(digital: &DigitalFactorization) -> AnalogFactorization {
    let q_total = 4 * digital.count();
    let (nt, nr) = (digital.nt(), digital.nr());
    // Columns accumulate contiguously, which is already the column-major
    // layout ComplexMatrix::new expects.
    let mut ft_data: Vec<Complex64> = Vec::with_capacity(nt * q_total);
    let mut fr_data: Vec<Complex64> = Vec::with_capacity(nr * q_total);
    let mut c_t = Vec::with_capacity(q_total);
    let mut c_r = Vec::with_capacity(q_total);
    let mut degenerate = false;

    for (wt, wr) in digital.tx_weights().iter().zip(digital.rx_weights()) {
        let t_split = unit_modulus_split(wt).expect("digital weights are column vectors");
        let r_split = unit_modulus_split(wr).expect("digital weights are column vectors");
        degenerate |= t_split.degenerate || r_split.degenerate;
        let t_phases = [&t_split.phase_a, &t_split.phase_b];
        let r_phases = [&r_split.phase_a, &r_split.phase_b];
        for j in 0..4usize {
            let i_r = (1 + j % 4).div_ceil(2); // 1,1,2,2
            let i_t = 1 + j % 2; // 1,2,1,2
            ft_data.extend(t_phases[i_t - 1].iter().copied());
            fr_data.extend(r_phases[i_r - 1].iter().copied());
            c_t.push(Complex64::new(t_split.gain, 0.0));
            c_r.push(Complex64::new(r_split.gain, 0.0));
        }
    }

    AnalogFactorization {
        f_t: ComplexMatrix::new(nt, q_total, ft_data).expect("phases are finite"),
        f_r: ComplexMatrix::new(nr, q_total, fr_data).expect("phases are finite"),
        c_t,
        c_r,
        degenerate,
    }
}

/// Evaluates `F_r diag(c_t ∘ c_r) F_t^T`.
pub fn reconstruct(f: &AnalogFactorization) -> ComplexMatrix {
    let q = f.q();
    if q == 0 {
        return ComplexMatrix::zeros(f.f_r.rows(), f.f_t.rows());
    }
    let gains = f.gains();
    let mut data: Vec<Complex64> = Vec::with_capacity(f.f_r.rows() * q);
    for (col, gain) in gains.iter().enumerate() {
        for row in 0..f.f_r.rows() {
            data.push(f.f_r[(row, col)] * gain);
        }
    }
    let scaled = ComplexMatrix::new(f.f_r.rows(), q, data).expect("gains are finite");
    &scaled * &f.f_t.transpose()
}
