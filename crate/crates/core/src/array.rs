//! Linear array geometries, steering vectors, the PSF measurement matrix,
//! sum co-arrays, and Dolph-Chebyshev target patterns.
//!
//! Element positions are normalized to half-wavelength units, so the steering
//! vector toward angle `phi` is `exp(j * pi * d * sin(phi))` entrywise.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArrayError {
    #[error("array must have at least one element")]
    EmptyArray,
    #[error("element positions must be strictly increasing")]
    PositionsNotIncreasing,
    #[error("positions must be finite")]
    NonFinitePosition,
    #[error("angle grid must be strictly increasing within [-pi/2, pi/2]")]
    InvalidGrid,
    #[error("angle grid must have at least one point")]
    EmptyGrid,
    #[error("Chebyshev target needs a virtual array of at least 2 elements, got {0}")]
    CoarrayTooSmall(usize),
    #[error("sidelobe level must be a positive, finite number of dB")]
    InvalidSidelobeLevel,
    #[error("target length {target} and measurement rows {rows} must equal grid length {grid}")]
    PsfShapeMismatch {
        target: usize,
        rows: usize,
        grid: usize,
    },
}

/// Element positions of a linear array in half-wavelength units,
/// strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<f64>,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<f64>) -> Result<Self, ArrayError> {
        if positions.is_empty() {
            return Err(ArrayError::EmptyArray);
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(ArrayError::NonFinitePosition);
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ArrayError::PositionsNotIncreasing);
        }
        Ok(Self { positions })
    }

    /// Uniform linear array with unit spacing, symmetric about zero:
    /// `[-(n-1)/2, ..., (n-1)/2]`.
    pub fn ula(n: usize) -> Result<Self, ArrayError> {
        if n == 0 {
            return Err(ArrayError::EmptyArray);
        }
        let offset = (n - 1) as f64 / 2.0;
        Self::new((0..n).map(|i| i as f64 - offset).collect())
    }

    /// The 7-element minimum-redundancy array spanning the same aperture as
    /// an 11-element ULA; its sum co-array is the contiguous set
    /// `{-10, ..., 10}`.
    pub fn mra7() -> Self {
        Self {
            positions: vec![-5.0, -4.0, -2.0, 0.0, 2.0, 4.0, 5.0],
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Distance between the outermost elements, in half-wavelengths.
    pub fn aperture(&self) -> f64 {
        self.positions[self.positions.len() - 1] - self.positions[0]
    }
}

/// Strictly increasing angles in radians, all within `[-pi/2, pi/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    angles: Vec<f64>,
}

impl AngleGrid {
    pub fn new(angles: Vec<f64>) -> Result<Self, ArrayError> {
        if angles.is_empty() {
            return Err(ArrayError::EmptyGrid);
        }
        let in_range = angles
            .iter()
            .all(|a| a.is_finite() && (-FRAC_PI_2..=FRAC_PI_2).contains(a));
        if !in_range || angles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ArrayError::InvalidGrid);
        }
        Ok(Self { angles })
    }

    /// `v` angles at the centers of `v` equal subintervals of
    /// `[-pi/2, pi/2]`; for odd `v` the midpoint is exactly broadside.
    pub fn uniform(v: usize) -> Result<Self, ArrayError> {
        if v == 0 {
            return Err(ArrayError::EmptyGrid);
        }
        let step = PI / v as f64;
        Self::new(
            (0..v)
                .map(|i| -FRAC_PI_2 + (i as f64 + 0.5) * step)
                .collect(),
        )
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Desired PSF samples and the measurement matrix that maps a vectorized
/// co-array weight matrix to the realized PSF on the same grid.
#[derive(Debug, Clone)]
pub struct PsfSpec {
    pub grid: AngleGrid,
    /// Desired PSF, a `V x 1` complex vector.
    pub target: ComplexMatrix,
    /// `V x (N_t * N_r)` measurement matrix.
    pub measurement: ComplexMatrix,
}

impl PsfSpec {
    pub fn new(
        grid: AngleGrid,
        target: ComplexMatrix,
        measurement: ComplexMatrix,
    ) -> Result<Self, ArrayError> {
        if target.rows() != grid.len() || target.cols() != 1 || measurement.rows() != grid.len() {
            return Err(ArrayError::PsfShapeMismatch {
                target: target.rows(),
                rows: measurement.rows(),
                grid: grid.len(),
            });
        }
        Ok(Self {
            grid,
            target,
            measurement,
        })
    }

    /// Convenience constructor for the Dolph-Chebyshev design problem: the
    /// target pattern uses a window as long as the tx/rx sum co-array.
    pub fn chebyshev(
        tx: &ArrayGeometry,
        rx: &ArrayGeometry,
        grid: &AngleGrid,
        sidelobe_db: f64,
    ) -> Result<Self, ArrayError> {
        let coarray = sum_coarray(tx, rx);
        let target = chebyshev_target(coarray.len(), sidelobe_db, grid)?;
        let measurement = measurement_matrix(tx, rx, grid);
        Self::new(grid.clone(), target, measurement)
    }
}

/// Steering vector `exp(j * pi * d_n * sin(angle))` as an `N x 1` vector;
/// every entry has unit modulus.
pub fn steering(geom: &ArrayGeometry, angle: f64) -> ComplexMatrix {
    let s = angle.sin();
    ComplexMatrix::from_fn(geom.len(), 1, |n, _| {
        let phase = PI * geom.positions()[n] * s;
        Complex64::new(phase.cos(), phase.sin())
    })
    .expect("steering phases are finite")
}

/// Sorted set of unique pairwise position sums `d_t + d_r`.
///
/// Sums closer than 1e-9 half-wavelengths are merged.
pub fn sum_coarray(tx: &ArrayGeometry, rx: &ArrayGeometry) -> Vec<f64> {
    let mut sums: Vec<f64> = tx
        .positions()
        .iter()
        .flat_map(|&t| rx.positions().iter().map(move |&r| t + r))
        .collect();
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sums.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    sums
}

/// Measurement matrix `A`: row `i` is `kronecker(a_t(v_i)^T, a_r(v_i)^T)`,
/// consistent with the column-major vectorization of the `N_r x N_t`
/// co-array weight matrix.
pub fn measurement_matrix(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    grid: &AngleGrid,
) -> ComplexMatrix {
    let (nt, nr) = (tx.len(), rx.len());
    ComplexMatrix::from_fn(grid.len(), nt * nr, |i, col| {
        let s = grid.angles()[i].sin();
        let it = col / nr;
        let ir = col % nr;
        let phase = PI * (tx.positions()[it] + rx.positions()[ir]) * s;
        Complex64::new(phase.cos(), phase.sin())
    })
    .expect("measurement phases are finite")
}

/// Dolph-Chebyshev window of length `len` with all sidelobes `sidelobe_db`
/// below the main lobe, normalized to a unit peak tap.
///
/// Computed by sampling the Chebyshev polynomial in the frequency domain and
/// taking the centered inverse DFT; the half-sample shift makes the same
/// formula exact for even and odd lengths.
pub fn chebyshev_window(len: usize, sidelobe_db: f64) -> Result<Vec<f64>, ArrayError> {
    if len < 2 {
        return Err(ArrayError::CoarrayTooSmall(len));
    }
    if !sidelobe_db.is_finite() || sidelobe_db <= 0.0 {
        return Err(ArrayError::InvalidSidelobeLevel);
    }
    let order = (len - 1) as f64;
    let ripple_ratio = 10f64.powf(sidelobe_db / 20.0);
    let x0 = (ripple_ratio.acosh() / order).cosh();

    let freq: Vec<f64> = (0..len)
        .map(|k| cheb_poly(len - 1, x0 * (PI * k as f64 / len as f64).cos()))
        .collect();

    let center = (len as f64 - 1.0) / 2.0;
    let mut w = vec![0.0; len];
    for (n, tap) in w.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &f) in freq.iter().enumerate() {
            acc += f * (TAU * k as f64 * (n as f64 - center) / len as f64).cos();
        }
        *tap = acc / len as f64;
    }
    let peak = w.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    for tap in &mut w {
        *tap /= peak;
    }
    Ok(w)
}

/// Chebyshev polynomial `T_n(x)` via the trigonometric/hyperbolic forms.
fn cheb_poly(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    if x.abs() <= 1.0 {
        (nf * x.acos()).cos()
    } else if x > 1.0 {
        (nf * x.acosh()).cosh()
    } else {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (nf * (-x).acosh()).cosh()
    }
}

/// Desired PSF: the beampattern of a length-`coarray_size` Dolph-Chebyshev
/// window placed on the contiguous half-wavelength virtual array, sampled on
/// `grid` and normalized to a unit broadside response.
pub fn chebyshev_target(
    coarray_size: usize,
    sidelobe_db: f64,
    grid: &AngleGrid,
) -> Result<ComplexMatrix, ArrayError> {
    let window = chebyshev_window(coarray_size, sidelobe_db)?;
    let center = (coarray_size as f64 - 1.0) / 2.0;
    let broadside: f64 = window.iter().sum();
    ComplexMatrix::from_fn(grid.len(), 1, |i, _| {
        let s = grid.angles()[i].sin();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &tap) in window.iter().enumerate() {
            let phase = PI * (m as f64 - center) * s;
            acc += tap * Complex64::new(phase.cos(), phase.sin());
        }
        acc / broadside
    })
    .map_err(|_| ArrayError::InvalidSidelobeLevel)
}

/// Levels (in dB relative to the global peak) of all local maxima outside the
/// main lobe of a sampled magnitude pattern.
///
/// The main lobe spans from the first local minimum left of the global peak to
/// the first one right of it; endpoint samples count as sidelobe peaks.
pub fn sidelobe_peaks_db(magnitudes: &[f64]) -> Vec<f64> {
    if magnitudes.len() < 3 {
        return Vec::new();
    }
    let peak_idx = magnitudes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let peak = magnitudes[peak_idx].max(f64::MIN_POSITIVE);

    let mut left = peak_idx;
    while left > 0 && magnitudes[left - 1] < magnitudes[left] {
        left -= 1;
    }
    let mut right = peak_idx;
    while right + 1 < magnitudes.len() && magnitudes[right + 1] < magnitudes[right] {
        right += 1;
    }

    let mut peaks = Vec::new();
    let mut push = |v: f64| peaks.push(20.0 * (v.max(f64::MIN_POSITIVE) / peak).log10());
    for i in 0..magnitudes.len() {
        if i >= left && i <= right {
            continue;
        }
        let is_peak = (i == 0 || magnitudes[i] >= magnitudes[i - 1])
            && (i + 1 == magnitudes.len() || magnitudes[i] >= magnitudes[i + 1]);
        if is_peak {
            push(magnitudes[i]);
        }
    }
    peaks
}
