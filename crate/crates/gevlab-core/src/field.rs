//! Field containers: Fourier coefficients and collocation values.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::GridSpec;
use crate::math;

pub type Complex64 = num_complex::Complex<f64>;

/// Fourier coefficients of a real scalar field on a [`GridSpec`].
///
/// The stored convention is `f(x) = sum_j c_j exp(i (2 pi / L) j . x)`, so
/// `coeff(0,0)` is the spatial mean and a real field obeys the Hermitian
/// symmetry `c_{-j} = conj(c_j)`. Coefficients are stored as separate
/// real/imaginary planes (better for the transform kernels); use
/// [`SpectralField::coeff`] for complex access.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Point values of a real scalar field at the `n x n` collocation points
/// `x = (L/n) (i1, i2)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: GridSpec,
    values: Vec<f64>,
}

/// Failures of field-level preconditions.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldError {
    /// Two fields in one operation live on different grids.
    GridMismatch,
    /// Hermitian symmetry violated beyond 1e-10 relative; the field does
    /// not represent real data.
    NonHermitian { rel_asymmetry: f64 },
    /// The zero mode must vanish (mean-free data) for inverse-Laplacian
    /// based operations.
    NonzeroMean { magnitude: f64 },
    /// A coefficient or value is NaN or infinite.
    NonFinite,
    /// Raw buffer length does not match `n*n`.
    BadLength { expected: usize, got: usize },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::GridMismatch => write!(f, "fields live on different grids"),
            FieldError::NonHermitian { rel_asymmetry } => write!(
                f,
                "spectrum is not Hermitian-symmetric (relative asymmetry {rel_asymmetry:.3e})"
            ),
            FieldError::NonzeroMean { magnitude } => {
                write!(f, "zero mode has magnitude {magnitude:.3e}; mean-free data required")
            }
            FieldError::NonFinite => write!(f, "field contains a non-finite entry"),
            FieldError::BadLength { expected, got } => {
                write!(f, "buffer length {got} does not match grid ({expected})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FieldError {}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        let m = grid.n() * grid.n();
        SpectralField {
            grid,
            re: vec![0.0; m],
            im: vec![0.0; m],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub(crate) fn planes(&self) -> (&[f64], &[f64]) {
        (&self.re, &self.im)
    }

    pub(crate) fn planes_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.re, &mut self.im)
    }

    /// Coefficient for wave-vector `(j1, j2)`.
    #[inline]
    pub fn coeff(&self, j1: i64, j2: i64) -> Complex64 {
        let idx = self.grid.coeff_index(j1, j2);
        Complex64::new(self.re[idx], self.im[idx])
    }

    #[inline]
    pub fn set_coeff(&mut self, j1: i64, j2: i64, c: Complex64) {
        let idx = self.grid.coeff_index(j1, j2);
        self.re[idx] = c.re;
        self.im[idx] = c.im;
    }

    /// Set the `(j1, j2)` and `(-j1, -j2)` coefficients as a conjugate pair,
    /// keeping the field real-valued.
    pub fn set_mode_pair(&mut self, j1: i64, j2: i64, c: Complex64) {
        self.set_coeff(j1, j2, c);
        self.set_coeff(-j1, -j2, c.conj());
    }

    /// Accumulate a conjugate mode pair (used when assembling forcing).
    pub fn add_mode_pair(&mut self, j1: i64, j2: i64, c: Complex64) {
        let cur = self.coeff(j1, j2);
        self.set_coeff(j1, j2, cur + c);
        if (j1, j2) != (0, 0) {
            let mirror = self.coeff(-j1, -j2);
            self.set_coeff(-j1, -j2, mirror + c.conj());
        }
    }

    /// Zero the mean mode.
    pub fn project_zero_mean(&mut self) {
        self.re[0] = 0.0;
        self.im[0] = 0.0;
    }

    /// Zero every coefficient with `max(|j1|,|j2|) > dealias_cutoff`.
    pub fn apply_dealias(&mut self) {
        let n = self.grid.n();
        let c = self.grid.dealias_cutoff() as i64;
        for i1 in 0..n {
            let j1 = self.grid.mode_of(i1);
            let row = i1 * n;
            if j1.abs() > c {
                self.re[row..row + n].fill(0.0);
                self.im[row..row + n].fill(0.0);
                continue;
            }
            for i2 in 0..n {
                if self.grid.mode_of(i2).abs() > c {
                    self.re[row + i2] = 0.0;
                    self.im[row + i2] = 0.0;
                }
            }
        }
    }

    /// Largest coefficient magnitude (exact max of `|c_j|`).
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.re.len() {
            let a = math::hypot(self.re[i], self.im[i]);
            if a > m {
                m = a;
            }
        }
        m
    }

    /// `sum_j |c_j|^2` with pairwise summation.
    pub fn sum_sq(&self) -> f64 {
        math::pairwise_sum_fn(0, self.re.len(), |i| {
            self.re[i] * self.re[i] + self.im[i] * self.im[i]
        })
    }

    /// Worst absolute deviation from Hermitian symmetry, `max |c_{-j} - conj(c_j)|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for i1 in 0..n {
            let m1 = (n - i1) % n;
            for i2 in 0..n {
                let m2 = (n - i2) % n;
                let a = i1 * n + i2;
                let b = m1 * n + m2;
                if b < a {
                    continue;
                }
                let dre = self.re[a] - self.re[b];
                let dim = self.im[a] + self.im[b];
                let d = math::hypot(dre, dim);
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Error unless the spectrum is Hermitian to 1e-10 relative (against the
    /// largest coefficient; the zero field passes).
    pub fn require_hermitian(&self) -> Result<(), FieldError> {
        let scale = self.max_abs();
        if !scale.is_finite() {
            return Err(FieldError::NonFinite);
        }
        if scale == 0.0 {
            return Ok(());
        }
        let rel = self.hermitian_asymmetry() / scale;
        if rel > 1e-10 {
            return Err(FieldError::NonHermitian { rel_asymmetry: rel });
        }
        Ok(())
    }

    /// Error if the mean mode exceeds 1e-12 relative to the largest
    /// coefficient; a tiny residual mean is treated as zero by callers.
    pub fn require_zero_mean(&self) -> Result<(), FieldError> {
        let scale = self.max_abs();
        let mean = math::hypot(self.re[0], self.im[0]);
        if scale > 0.0 && mean > 1e-12 * scale {
            return Err(FieldError::NonzeroMean { magnitude: mean });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().all(|x| x.is_finite()) && self.im.iter().all(|x| x.is_finite())
    }

    /// Exact (bitwise) equality of coefficients.
    pub fn bit_eq(&self, other: &SpectralField) -> bool {
        self.grid == other.grid
            && self
                .re
                .iter()
                .zip(&other.re)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self
                .im
                .iter()
                .zip(&other.im)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl PhysicalField {
    pub fn zeros(grid: GridSpec) -> Self {
        PhysicalField {
            grid,
            values: vec![0.0; grid.n() * grid.n()],
        }
    }

    /// Build from row-major values at the collocation points.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self, FieldError> {
        let expected = grid.n() * grid.n();
        if values.len() != expected {
            return Err(FieldError::BadLength {
                expected,
                got: values.len(),
            });
        }
        Ok(PhysicalField { grid, values })
    }

    /// Sample a closure `f(x1, x2)` at the collocation points.
    pub fn sample<F: Fn(f64, f64) -> f64>(grid: GridSpec, f: F) -> Self {
        let n = grid.n();
        let dx = grid.dx();
        let mut values = Vec::with_capacity(n * n);
        for i1 in 0..n {
            let x1 = dx * i1 as f64;
            for i2 in 0..n {
                values.push(f(x1, dx * i2 as f64));
            }
        }
        PhysicalField { grid, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Value at grid point `(i1, i2)`.
    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.grid.n() + i2]
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for &v in &self.values {
            let a = math::abs(v);
            if a > m {
                m = a;
            }
        }
        m
    }
}
