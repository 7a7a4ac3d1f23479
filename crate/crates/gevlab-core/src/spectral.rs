//! Transforms between spectral and physical space, the Biot-Savart law,
//! and the dealiased advection term.
//!
//! Coefficient convention: a field is `f(x) = sum_j f_j exp(i (2 pi / L) j . x)`
//! with `j` running over the signed integer lattice in FFT storage order.
//! Synthesis (spectral to physical) is the unnormalised inverse transform;
//! analysis divides by `n^2`. A constant field `c` therefore has
//! coefficient `c` at the origin, and `cos(x1)` on the `2 pi` torus stores
//! `0.5` at `(1, 0)` and `(-1, 0)`.
//!
//! The advection term `u . grad omega` costs three complex transforms:
//! the two velocity components ride one inverse transform packed as
//! `u1 + i u2`, the two vorticity gradients ride a second, and the real
//! product comes back through a single forward transform followed by exact
//! Hermitian symmetrisation and the 2/3-rule mask.
//!
//! The velocity is built from a mantissa-trimmed stream function so that
//! the discrete divergence `k . u_hat(k)` vanishes identically in floating
//! point, not merely to round-off; see [`SpectralOps::biot_savart`].

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;

use crate::fft::{fft2, FftPlan, Scratch};
use crate::field::{FieldError, PhysicalField, SpectralField};
use crate::grid::GridSpec;
use crate::math;

pub type Complex64 = Complex<f64>;

/// Result of one advection evaluation.
pub struct Advection {
    /// Dealiased, zero-mean spectral coefficients of `u . grad omega`.
    pub term: SpectralField,
    /// Max of `|u|` over the base collocation grid, from this evaluation's
    /// own physical velocity; feeds the CFL controller for free.
    pub max_speed: f64,
}

/// Transform plans, mode tables, and work planes for one grid.
///
/// Holds mutable scratch, so solvers keep one instance per thread.
pub struct SpectralOps {
    grid: GridSpec,
    plan: FftPlan,
    scratch: Scratch,
    /// Signed mode value as f64 per array index along one axis.
    mode_f: Vec<f64>,
    /// `(L / 2 pi) / |j|^2` per flat index; zero at the origin. Applied to
    /// the vorticity this is the stream-function magnitude up to sign.
    inv_lap: Vec<f64>,
    wa_re: Vec<f64>,
    wa_im: Vec<f64>,
    wb_re: Vec<f64>,
    wb_im: Vec<f64>,
}

impl SpectralOps {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let mode_f: Vec<f64> = (0..n).map(|i| grid.mode_of(i) as f64).collect();
        let factor = grid.length() / core::f64::consts::TAU;
        let mut inv_lap = vec![0.0; n * n];
        for (idx, j1, j2) in grid.modes() {
            let k2 = (j1 * j1 + j2 * j2) as f64;
            if k2 > 0.0 {
                inv_lap[idx] = factor / k2;
            }
        }
        SpectralOps {
            grid,
            plan: FftPlan::new(n),
            scratch: Scratch::new(n),
            mode_f,
            inv_lap,
            wa_re: vec![0.0; n * n],
            wa_im: vec![0.0; n * n],
            wb_re: vec![0.0; n * n],
            wb_im: vec![0.0; n * n],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Synthesis: unnormalised inverse transform of a Hermitian coefficient
    /// field; the imaginary residual (pure round-off) is dropped.
    pub fn to_physical(&mut self, f: &SpectralField) -> Result<PhysicalField, FieldError> {
        f.require_hermitian()?;
        let (re, im) = f.planes();
        self.wa_re.copy_from_slice(re);
        self.wa_im.copy_from_slice(im);
        fft2(&self.plan, &mut self.wa_re, &mut self.wa_im, &mut self.scratch, true);
        let values = self.wa_re.clone();
        Ok(PhysicalField::from_values(self.grid, values).expect("grid-sized synthesis output"))
    }

    /// Analysis: forward transform scaled by `1/n^2`, then exact Hermitian
    /// symmetrisation (real input guarantees symmetry up to round-off; the
    /// averaging makes it bit-exact).
    pub fn to_spectral(&mut self, p: &PhysicalField) -> SpectralField {
        let n = self.grid.n();
        self.wa_re.copy_from_slice(p.values());
        self.wa_im.fill(0.0);
        fft2(&self.plan, &mut self.wa_re, &mut self.wa_im, &mut self.scratch, false);
        let mut out = SpectralField::zeros(self.grid);
        symmetrize_scaled(
            self.grid,
            &self.wa_re,
            &self.wa_im,
            &mut out,
            1.0 / (n * n) as f64,
            false,
        );
        out
    }

    /// Velocity components from the vorticity: `u = grad^perp (Delta^-1 w)`,
    /// i.e. `u1_hat = i j2 g`, `u2_hat = -i j1 g` with
    /// `g = trim(w_hat (L / 2 pi) / |j|^2)`.
    ///
    /// The mantissa trim (to the grid's retained-mode bit budget) makes
    /// every product `j_m * g` exact, so the two halves of the divergence
    /// `j1 u1_hat + j2 u2_hat` round identically and cancel to exactly
    /// zero for any dealiased input.
    pub fn biot_savart(&self, w: &SpectralField) -> (SpectralField, SpectralField) {
        let bits = self.grid.velocity_trim_bits();
        let n = self.grid.n();
        let mut u1 = SpectralField::zeros(self.grid);
        let mut u2 = SpectralField::zeros(self.grid);
        let (wr, wi) = w.planes();
        let (u1r, u1i) = u1.planes_mut();
        let (u2r, u2i) = u2.planes_mut();
        for i1 in 0..n {
            let j1 = self.mode_f[i1];
            let row = i1 * n;
            for i2 in 0..n {
                let idx = row + i2;
                let j2 = self.mode_f[i2];
                let gr = math::trim_mantissa(wr[idx] * self.inv_lap[idx], bits);
                let gi = math::trim_mantissa(wi[idx] * self.inv_lap[idx], bits);
                u1r[idx] = -j2 * gi;
                u1i[idx] = j2 * gr;
                u2r[idx] = j1 * gi;
                u2i[idx] = -j1 * gr;
            }
        }
        (u1, u2)
    }

    /// Vorticity of a velocity pair: `rot u = d1 u2 - d2 u1`.
    pub fn rot(&self, u1: &SpectralField, u2: &SpectralField) -> SpectralField {
        let n = self.grid.n();
        let s = core::f64::consts::TAU / self.grid.length();
        let mut out = SpectralField::zeros(self.grid);
        let (ar, ai) = u1.planes();
        let (br, bi) = u2.planes();
        let (or_, oi) = out.planes_mut();
        for i1 in 0..n {
            let j1 = self.mode_f[i1];
            let row = i1 * n;
            for i2 in 0..n {
                let idx = row + i2;
                let j2 = self.mode_f[i2];
                // i s (j1 * u2 - j2 * u1)
                or_[idx] = s * (j2 * ai[idx] - j1 * bi[idx]);
                oi[idx] = s * (j1 * br[idx] - j2 * ar[idx]);
            }
        }
        out
    }

    /// Spectral partial derivative along `axis` (0 or 1).
    pub fn derivative(&self, f: &SpectralField, axis: usize) -> SpectralField {
        assert!(axis < 2, "axis must be 0 or 1");
        let n = self.grid.n();
        let s = core::f64::consts::TAU / self.grid.length();
        let mut out = SpectralField::zeros(self.grid);
        let (fr, fi) = f.planes();
        let (or_, oi) = out.planes_mut();
        for i1 in 0..n {
            let row = i1 * n;
            for i2 in 0..n {
                let idx = row + i2;
                let j = if axis == 0 {
                    self.mode_f[i1]
                } else {
                    self.mode_f[i2]
                };
                or_[idx] = -s * j * fi[idx];
                oi[idx] = s * j * fr[idx];
            }
        }
        out
    }

    /// `u . grad omega`, dealiased, with the advecting velocity's grid max
    /// speed as a by-product. Allocates the output; see [`Self::advect_into`].
    pub fn advect(&mut self, w: &SpectralField) -> Result<Advection, FieldError> {
        let mut term = SpectralField::zeros(self.grid);
        let max_speed = self.advect_into(w, &mut term)?;
        Ok(Advection { term, max_speed })
    }

    /// As [`Self::advect`], writing into a caller-owned field (the solver
    /// calls this three times per step and keeps the buffers warm).
    /// Returns the base-grid max speed.
    pub fn advect_into(
        &mut self,
        w: &SpectralField,
        out: &mut SpectralField,
    ) -> Result<f64, FieldError> {
        assert!(out.grid() == self.grid, "output field grid mismatch");
        w.require_hermitian()?;
        let n = self.grid.n();
        let s = core::f64::consts::TAU / self.grid.length();
        let bits = self.grid.velocity_trim_bits();
        let (wr, wi) = w.planes();

        // Pack A = u1_hat + i u2_hat = (j1 + i j2) g  (g the trimmed
        // stream-function magnitude) and B = grad1_hat + i grad2_hat
        // = i s (j1 + i j2) w_hat, in one sweep.
        for i1 in 0..n {
            let j1 = self.mode_f[i1];
            let row = i1 * n;
            let war = &mut self.wa_re[row..row + n];
            let wai = &mut self.wa_im[row..row + n];
            let wbr = &mut self.wb_re[row..row + n];
            let wbi = &mut self.wb_im[row..row + n];
            let wrr = &wr[row..row + n];
            let wii = &wi[row..row + n];
            let inv = &self.inv_lap[row..row + n];
            for i2 in 0..n {
                let j2 = self.mode_f[i2];
                let re = wrr[i2];
                let im = wii[i2];
                let gr = math::trim_mantissa(re * inv[i2], bits);
                let gi = math::trim_mantissa(im * inv[i2], bits);
                war[i2] = j1 * gr - j2 * gi;
                wai[i2] = j1 * gi + j2 * gr;
                wbr[i2] = -s * (j1 * im + j2 * re);
                wbi[i2] = s * (j1 * re - j2 * im);
            }
        }
        fft2(&self.plan, &mut self.wa_re, &mut self.wa_im, &mut self.scratch, true);
        fft2(&self.plan, &mut self.wb_re, &mut self.wb_im, &mut self.scratch, true);

        // Physical product u . grad omega and the max speed, fused.
        let mut speed2 = 0.0f64;
        for idx in 0..n * n {
            let u1 = self.wa_re[idx];
            let u2 = self.wa_im[idx];
            let g1 = self.wb_re[idx];
            let g2 = self.wb_im[idx];
            let sp = u1 * u1 + u2 * u2;
            if sp > speed2 {
                speed2 = sp;
            }
            self.wa_re[idx] = u1 * g1 + u2 * g2;
            self.wa_im[idx] = 0.0;
        }

        fft2(&self.plan, &mut self.wa_re, &mut self.wa_im, &mut self.scratch, false);
        symmetrize_scaled(
            self.grid,
            &self.wa_re,
            &self.wa_im,
            out,
            1.0 / (n * n) as f64,
            true,
        );
        out.project_zero_mean();
        Ok(math::sqrt(speed2))
    }

    /// Max over modes of `|k . u_hat(k)|` (physical wave-number scale) for
    /// the velocity this operator would build from `w`. Exactly zero for
    /// dealiased input by the trim construction.
    pub fn max_divergence(&self, w: &SpectralField) -> f64 {
        let n = self.grid.n();
        let s = core::f64::consts::TAU / self.grid.length();
        let bits = self.grid.velocity_trim_bits();
        let (wr, wi) = w.planes();
        let mut worst2 = 0.0f64;
        for i1 in 0..n {
            let j1 = self.mode_f[i1];
            let row = i1 * n;
            for i2 in 0..n {
                let idx = row + i2;
                let j2 = self.mode_f[i2];
                let gr = math::trim_mantissa(wr[idx] * self.inv_lap[idx], bits);
                let gi = math::trim_mantissa(wi[idx] * self.inv_lap[idx], bits);
                let u1r = -j2 * gi;
                let u1i = j2 * gr;
                let u2r = j1 * gi;
                let u2i = -j1 * gr;
                // evaluated exactly as written: the two products in each
                // component round the same exact value and cancel
                let dr = j1 * u1r + j2 * u2r;
                let di = j1 * u1i + j2 * u2i;
                let d2 = dr * dr + di * di;
                if d2 > worst2 {
                    worst2 = d2;
                }
            }
        }
        s * math::sqrt(worst2)
    }

    /// Shell-max amplitude spectrum: `S(kappa) = max |w_j|` over the ring
    /// `kappa - 1/2 < |j| <= kappa + 1/2`, for `kappa = 0 ..= cutoff`.
    /// Modes whose radius rounds beyond the cutoff are ignored (they sit
    /// past the fit window and the resolution check).
    pub fn shell_spectrum(&self, w: &SpectralField) -> Vec<f64> {
        let cutoff = self.grid.dealias_cutoff();
        let mut best2 = vec![0.0f64; cutoff + 1];
        let (wr, wi) = w.planes();
        for (idx, j1, j2) in self.grid.modes() {
            let r2 = (j1 * j1 + j2 * j2) as f64;
            let shell = math::floor(math::sqrt(r2) + 0.5) as usize;
            if shell <= cutoff {
                let a2 = wr[idx] * wr[idx] + wi[idx] * wi[idx];
                if a2 > best2[shell] {
                    best2[shell] = a2;
                }
            }
        }
        best2.into_iter().map(math::sqrt).collect()
    }

    /// `L^2`-scaled inner product `area * sum_j Re(a_j conj(b_j))`; equals
    /// the integral of `a b` over the torus for real fields (Parseval).
    pub fn inner(&self, a: &SpectralField, b: &SpectralField) -> f64 {
        let (ar, ai) = a.planes();
        let (br, bi) = b.planes();
        let sum = math::pairwise_sum_fn(0, ar.len(), |i| ar[i] * br[i] + ai[i] * bi[i]);
        self.grid.area() * sum
    }

    /// `area * sum_j Re(a_j conj(b_j)) / |k_j|^2`, skipping the origin.
    /// With `a` the forcing and `b` the vorticity this is the energy
    /// injection rate `<f, u>`.
    pub fn inner_inv_laplacian(&self, a: &SpectralField, b: &SpectralField) -> f64 {
        let s = core::f64::consts::TAU / self.grid.length();
        let factor = self.grid.length() / core::f64::consts::TAU;
        let (ar, ai) = a.planes();
        let (br, bi) = b.planes();
        // inv_lap holds (L / 2 pi) / |j|^2 = factor / |j|^2; dividing by
        // |k|^2 = s^2 |j|^2 means multiplying by inv_lap / (s^2 * factor)
        let scale = self.grid.area() / (s * s * factor);
        let sum = math::pairwise_sum_fn(0, ar.len(), |i| {
            (ar[i] * br[i] + ai[i] * bi[i]) * self.inv_lap[i]
        });
        scale * sum
    }
}

/// Copy `src` into `out` with scale factor, exact Hermitian averaging, and
/// optionally the 2/3-rule mask. Pairs `(j, -j)` are averaged as
/// `(c + conj(c_mirror)) / 2`, self-conjugate modes are forced real.
fn symmetrize_scaled(
    grid: GridSpec,
    src_re: &[f64],
    src_im: &[f64],
    out: &mut SpectralField,
    scale: f64,
    mask: bool,
) {
    let n = grid.n();
    let cutoff = grid.dealias_cutoff() as i64;
    let (or_, oi) = out.planes_mut();
    let half = 0.5 * scale;
    for i1 in 0..n {
        let m1 = (n - i1) % n;
        let j1 = grid.mode_of(i1);
        let keep_row = !mask || j1.abs() <= cutoff;
        for i2 in 0..n {
            let a = i1 * n + i2;
            let m2 = (n - i2) % n;
            let b = m1 * n + m2;
            if a > b {
                continue; // handled when the mirror was visited
            }
            let j2 = grid.mode_of(i2);
            let keep = keep_row && (!mask || j2.abs() <= cutoff);
            if !keep {
                or_[a] = 0.0;
                oi[a] = 0.0;
                or_[b] = 0.0;
                oi[b] = 0.0;
                continue;
            }
            if a == b {
                or_[a] = scale * src_re[a];
                oi[a] = 0.0;
            } else {
                let rr = half * (src_re[a] + src_re[b]);
                let ii = half * (src_im[a] - src_im[b]);
                or_[a] = rr;
                oi[a] = ii;
                or_[b] = rr;
                oi[b] = -ii;
            }
        }
    }
}
