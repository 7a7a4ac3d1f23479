//! Uniform periodic grid on the square torus `[0, L)^2`.

use core::fmt;

use serde::{Deserialize, Serialize};

/// Square collocation grid with `n x n` points on `[0, L)^2` and the 2/3-rule
/// dealiasing cutoff `floor(n/3)` baked in.
///
/// Wave-vectors are integer pairs `j = (j1, j2)` with each component in
/// `-n/2 .. n/2 - 1`; the physical wave-vector is `(2 pi / L) j`. Arrays are
/// row-major with `j1` slow and `j2` fast, each axis in FFT-standard order
/// `0 .. n/2-1, -n/2 .. -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    length: f64,
    dealias_cutoff: usize,
}

/// Grid construction failures.
#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// `n` must be even so the Nyquist mode is well defined.
    OddN(usize),
    /// `n` must be at least 8 to leave a usable dealiased band.
    TooSmall(usize),
    /// Domain length must be finite and positive.
    BadLength(f64),
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::OddN(n) => write!(f, "grid size {n} is odd; n must be even"),
            GridError::TooSmall(n) => write!(f, "grid size {n} is below the minimum of 8"),
            GridError::BadLength(l) => write!(f, "domain length {l} is not finite and positive"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GridError {}

impl GridSpec {
    /// Build a grid with `n` points per axis on `[0, length)^2`.
    pub fn new(n: usize, length: f64) -> Result<Self, GridError> {
        if n < 8 {
            return Err(GridError::TooSmall(n));
        }
        if n % 2 != 0 {
            return Err(GridError::OddN(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(GridError::BadLength(length));
        }
        Ok(GridSpec {
            n,
            length,
            dealias_cutoff: n / 3,
        })
    }

    /// Convenience constructor for the standard `2 pi`-periodic torus.
    pub fn two_pi(n: usize) -> Result<Self, GridError> {
        Self::new(n, core::f64::consts::TAU)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Largest retained wave-number component: `floor(n/3)`.
    pub fn dealias_cutoff(&self) -> usize {
        self.dealias_cutoff
    }

    /// Grid spacing `L / n`.
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Area of the domain, `L^2`.
    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    /// Smallest positive eigenvalue of the Stokes operator on this torus,
    /// `(2 pi / L)^2`.
    pub fn lambda_1(&self) -> f64 {
        let k0 = core::f64::consts::TAU / self.length;
        k0 * k0
    }

    /// Signed integer wave-number for array index `i` along one axis.
    #[inline(always)]
    pub fn mode_of(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Array index along one axis for signed wave-number `j` in
    /// `-n/2 ..= n/2 - 1`.
    #[inline(always)]
    pub fn index_of(&self, j: i64) -> usize {
        debug_assert!(j >= -(self.n as i64) / 2 && j < self.n as i64 / 2);
        if j >= 0 {
            j as usize
        } else {
            (j + self.n as i64) as usize
        }
    }

    /// Flat row-major index of the coefficient for wave-vector `(j1, j2)`.
    #[inline(always)]
    pub fn coeff_index(&self, j1: i64, j2: i64) -> usize {
        self.index_of(j1) * self.n + self.index_of(j2)
    }

    /// True if `(j1, j2)` survives the 2/3-rule mask
    /// `max(|j1|, |j2|) <= dealias_cutoff`.
    #[inline(always)]
    pub fn retained(&self, j1: i64, j2: i64) -> bool {
        let c = self.dealias_cutoff as i64;
        j1.abs() <= c && j2.abs() <= c
    }

    /// Number of mantissa bits to trim from `omega_hat / |k|^2` so that
    /// products with any retained integer wave-number stay exact. See
    /// `spectral::biot_savart`.
    pub(crate) fn velocity_trim_bits(&self) -> u32 {
        let mut bits = 0u32;
        while (1usize << bits) <= self.dealias_cutoff {
            bits += 1;
        }
        bits
    }

    /// Iterate all flat indices with their signed wave-vectors.
    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        let n = self.n;
        (0..n * n).map(move |idx| {
            let j1 = self.mode_of(idx / n);
            let j2 = self.mode_of(idx % n);
            (idx, j1, j2)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes_and_lengths() {
        assert_eq!(GridSpec::new(7, 1.0), Err(GridError::TooSmall(7)));
        assert_eq!(GridSpec::new(9, 1.0), Err(GridError::OddN(9)));
        assert_eq!(GridSpec::new(6, 1.0), Err(GridError::TooSmall(6)));
        assert_eq!(GridSpec::new(16, 0.0), Err(GridError::BadLength(0.0)));
        assert_eq!(
            GridSpec::new(16, f64::INFINITY),
            Err(GridError::BadLength(f64::INFINITY))
        );
    }

    #[test]
    fn cutoff_is_floor_n_over_three() {
        assert_eq!(GridSpec::two_pi(8).unwrap().dealias_cutoff(), 2);
        assert_eq!(GridSpec::two_pi(16).unwrap().dealias_cutoff(), 5);
        assert_eq!(GridSpec::two_pi(128).unwrap().dealias_cutoff(), 42);
        assert_eq!(GridSpec::two_pi(256).unwrap().dealias_cutoff(), 85);
    }

    #[test]
    fn mode_index_round_trip() {
        let g = GridSpec::two_pi(16).unwrap();
        for i in 0..16 {
            let j = g.mode_of(i);
            assert_eq!(g.index_of(j), i);
        }
        assert_eq!(g.mode_of(0), 0);
        assert_eq!(g.mode_of(7), 7);
        assert_eq!(g.mode_of(8), -8);
        assert_eq!(g.mode_of(15), -1);
    }

    #[test]
    fn lambda_1_is_one_on_the_standard_torus() {
        let g = GridSpec::two_pi(32).unwrap();
        assert!((g.lambda_1() - 1.0).abs() < 1e-15);
        assert!((g.area() - 4.0 * core::f64::consts::PI * core::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn velocity_trim_bits_cover_the_cutoff() {
        for n in [8usize, 16, 64, 128, 256, 512] {
            let g = GridSpec::two_pi(n).unwrap();
            let bits = g.velocity_trim_bits();
            assert!((1usize << bits) > g.dealias_cutoff());
            assert!(bits <= 10);
        }
    }
}
