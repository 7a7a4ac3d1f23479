//! Norms of spectral fields: plain L2, even-exponent Lp by exact padded
//! quadrature, the grid sup norm, and Gevrey-weighted norms.
//!
//! All norms carry the domain prefactor: `||f||_L2 = L sqrt(sum |f_j|^2)`,
//! matching the integral definition on the torus of side `L`.
//!
//! For even `p` the integrand `|f|^p` of a field with modes up to the
//! dealias cutoff `c` is a trigonometric polynomial of degree `p c`, so
//! quadrature on a grid with `N > p c` points per axis is exact: `N = n`
//! suffices for `p = 2`, `2n` for `p = 4`, `4n` for `p = 8`. The sup norm
//! is evaluated on the `2n` grid by contract (a sharp lower bound on the
//! true sup, adequate for band-limited attractor states).

use alloc::vec;
use alloc::vec::Vec;

use crate::fft::{fft2, FftPlan, Scratch};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum NormError {
    /// Lp quadrature is wired for p in {2, 4, 8} only.
    UnsupportedExponent(u32),
    /// A Gevrey weight overflowed; the offending shell radius is reported
    /// so callers can shrink tau instead of propagating infinities.
    Overflow { shell: usize },
}

impl core::fmt::Display for NormError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NormError::UnsupportedExponent(p) => {
                write!(f, "Lp norm supports p in {{2, 4, 8}}, got {p}")
            }
            NormError::Overflow { shell } => {
                write!(f, "Gevrey weight overflowed at shell |j| ~ {shell}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NormError {}

/// Zero-padded synthesis workspace at one padding factor.
struct PadLevel {
    grid: GridSpec,
    plan: FftPlan,
    scratch: Scratch,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl PadLevel {
    fn new(base: GridSpec, factor: usize) -> Self {
        let big_n = base.n() * factor;
        let grid = GridSpec::new(big_n, base.length()).expect("padded grid");
        PadLevel {
            grid,
            plan: FftPlan::new(big_n),
            scratch: Scratch::new(big_n),
            re: vec![0.0; big_n * big_n],
            im: vec![0.0; big_n * big_n],
        }
    }

    /// Synthesise `f` on this level's finer grid (band-limited
    /// interpolation: coefficients embed unchanged).
    fn synthesize(&mut self, f: &SpectralField) {
        let n = f.grid().n();
        let big = self.grid.n();
        let half = n / 2;
        let shift = big - n;
        self.re.fill(0.0);
        self.im.fill(0.0);
        let (sr, si) = f.planes();
        for i1 in 0..n {
            let r = if i1 < half { i1 } else { i1 + shift };
            let src = i1 * n;
            let dst = r * big;
            self.re[dst..dst + half].copy_from_slice(&sr[src..src + half]);
            self.im[dst..dst + half].copy_from_slice(&si[src..src + half]);
            self.re[dst + shift + half..dst + big].copy_from_slice(&sr[src + half..src + n]);
            self.im[dst + shift + half..dst + big].copy_from_slice(&si[src + half..src + n]);
        }
        fft2(&self.plan, &mut self.re, &mut self.im, &mut self.scratch, true);
    }
}

/// Norm evaluator for one base grid. Padded transform plans are built on
/// first use and reused; keep one instance per thread.
pub struct NormOps {
    grid: GridSpec,
    pad2: Option<PadLevel>,
    pad4: Option<PadLevel>,
    weights: Vec<f64>,
}

impl NormOps {
    pub fn new(grid: GridSpec) -> Self {
        NormOps {
            grid,
            pad2: None,
            pad4: None,
            weights: vec![0.0; grid.n() * grid.n()],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    fn level(&mut self, factor: usize) -> &mut PadLevel {
        let slot = match factor {
            2 => &mut self.pad2,
            4 => &mut self.pad4,
            _ => unreachable!("padding factor is 2 or 4"),
        };
        slot.get_or_insert_with(|| PadLevel::new(self.grid, factor))
    }

    /// `L sqrt(sum |f_j|^2)`, evaluated spectrally (exact Parseval form).
    pub fn l2(&self, f: &SpectralField) -> f64 {
        assert!(f.grid() == self.grid, "field grid mismatch");
        math::sqrt(self.grid.area() * f.sum_sq())
    }

    /// Lp norm for even p in {2, 4, 8} by exact quadrature on the padded
    /// grid (p = 2 delegates to the spectral form, same value).
    pub fn lp(&mut self, f: &SpectralField, p: u32) -> Result<f64, NormError> {
        assert!(f.grid() == self.grid, "field grid mismatch");
        let factor = match p {
            2 => return Ok(self.l2(f)),
            4 => 2,
            8 => 4,
            _ => return Err(NormError::UnsupportedExponent(p)),
        };
        let level = self.level(factor);
        level.synthesize(f);
        let big = level.grid.n();
        let values = &level.re;
        let sum = math::pairwise_sum_fn(0, big * big, |i| {
            let v2 = values[i] * values[i];
            let v4 = v2 * v2;
            if p == 4 {
                v4
            } else {
                v4 * v4
            }
        });
        let mean = sum / (big * big) as f64;
        Ok(math::powf(self.grid.area() * mean, 1.0 / p as f64))
    }

    /// Sup norm on the 2x refined grid.
    pub fn linf(&mut self, f: &SpectralField) -> f64 {
        assert!(f.grid() == self.grid, "field grid mismatch");
        let level = self.level(2);
        level.synthesize(f);
        let mut worst = 0.0f64;
        for &v in level.re.iter() {
            let a = math::abs(v);
            if a > worst {
                worst = a;
            }
        }
        worst
    }

    /// Gevrey norm `L sqrt(sum |j|^{4 alpha} exp(2 tau |j|^{2 s}) |f_j|^2)`.
    ///
    /// Modes with exactly zero coefficient contribute nothing regardless
    /// of their weight, so masked regions can never overflow; a weighted
    /// term that leaves f64 range reports the shell it happened on.
    pub fn gevrey(&mut self, f: &SpectralField, tau: f64, s: f64, alpha: f64) -> Result<f64, NormError> {
        assert!(f.grid() == self.grid, "field grid mismatch");
        let (fr, fi) = f.planes();
        let half = s == 0.5;
        for (idx, j1, j2) in self.grid.modes() {
            let a2 = fr[idx] * fr[idx] + fi[idx] * fi[idx];
            if a2 == 0.0 {
                self.weights[idx] = 0.0;
                continue;
            }
            let r2 = (j1 * j1 + j2 * j2) as f64;
            let growth = if r2 == 0.0 {
                if alpha == 0.0 {
                    1.0
                } else {
                    0.0 // |j|^{4 alpha} vanishes at the origin
                }
            } else {
                let radial = if half { math::sqrt(r2) } else { math::powf(r2, s) };
                let poly = if alpha == 0.0 {
                    1.0
                } else {
                    math::powf(r2, 2.0 * alpha)
                };
                poly * math::exp(2.0 * tau * radial)
            };
            let term = growth * a2;
            if !term.is_finite() {
                let shell = math::floor(math::sqrt(r2) + 0.5) as usize;
                return Err(NormError::Overflow { shell });
            }
            self.weights[idx] = term;
        }
        Ok(math::sqrt(self.grid.area() * math::pairwise_sum(&self.weights)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhysicalField;
    use crate::spectral::{Complex64, SpectralOps};

    fn grid(n: usize) -> GridSpec {
        GridSpec::two_pi(n).unwrap()
    }

    fn cosine_x1(g: GridSpec) -> SpectralField {
        let mut f = SpectralField::zeros(g);
        f.set_mode_pair(1, 0, Complex64::new(0.5, 0.0));
        f
    }

    #[test]
    fn l2_of_a_cosine_matches_the_integral() {
        // integral of cos^2 over the 2 pi torus is 2 pi^2
        let want = (2.0 * core::f64::consts::PI * core::f64::consts::PI).sqrt();
        let ops = NormOps::new(grid(32));
        assert!((ops.l2(&cosine_x1(grid(32))) - want).abs() < 1e-13);
    }

    #[test]
    fn l4_and_l8_of_a_cosine_match_the_wallis_integrals() {
        // mean of cos^4 is 3/8, of cos^8 is 35/128
        let g = grid(32);
        let mut ops = NormOps::new(g);
        let f = cosine_x1(g);
        let area = g.area();
        let want4 = (area * 3.0 / 8.0).powf(0.25);
        let want8 = (area * 35.0 / 128.0).powf(0.125);
        assert!((ops.lp(&f, 4).unwrap() - want4).abs() < 1e-13);
        assert!((ops.lp(&f, 8).unwrap() - want8).abs() < 1e-13);
        assert!(matches!(
            ops.lp(&f, 6),
            Err(NormError::UnsupportedExponent(6))
        ));
    }

    #[test]
    fn sup_norm_of_grid_aligned_extremum() {
        let g = grid(32);
        let mut ops = NormOps::new(g);
        let mut f = cosine_x1(g);
        assert!((ops.linf(&f) - 1.0).abs() < 1e-13);
        // add a second harmonic peaking at the same point
        f.set_mode_pair(0, 2, Complex64::new(0.25, 0.0));
        assert!((ops.linf(&f) - 1.5).abs() < 1e-13);
    }

    #[test]
    fn gevrey_at_zero_tau_is_l2() {
        let g = grid(16);
        let mut ops = NormOps::new(g);
        let mut f = SpectralField::zeros(g);
        f.set_mode_pair(2, 1, Complex64::new(0.3, -0.1));
        f.set_mode_pair(0, 4, Complex64::new(0.05, 0.2));
        let a = ops.gevrey(&f, 0.0, 0.5, 0.0).unwrap();
        assert!((a - ops.l2(&f)).abs() < 1e-14);
    }

    #[test]
    fn gevrey_single_mode_closed_form() {
        // one conjugate pair at |j| = 5, s = 1/2: weight exp(2 tau |j|)
        let g = grid(32);
        let mut ops = NormOps::new(g);
        let mut f = SpectralField::zeros(g);
        let amp = 0.125;
        f.set_mode_pair(3, 4, Complex64::new(amp, 0.0));
        let tau = 0.3f64;
        let want = g.length() * amp * (2.0f64).sqrt() * (tau * 5.0).exp();
        let got = ops.gevrey(&f, tau, 0.5, 0.0).unwrap();
        assert!((got - want).abs() / want < 1e-13);
    }

    #[test]
    fn gevrey_overflow_reports_the_shell() {
        let g = grid(32);
        let mut ops = NormOps::new(g);
        let mut f = SpectralField::zeros(g);
        f.set_mode_pair(1, 0, Complex64::new(0.5, 0.0));
        f.set_mode_pair(6, 8, Complex64::new(1e-3, 0.0)); // |j| = 10
        match ops.gevrey(&f, 200.0, 0.5, 0.0) {
            Err(NormError::Overflow { shell }) => assert_eq!(shell, 10),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn measure_compensated_lp_ladder_is_monotone() {
        // |O|^{-1/p} ||f||_p is nondecreasing in p, capped by the sup norm
        let g = grid(32);
        let mut nops = NormOps::new(g);
        let mut sops = SpectralOps::new(g);
        let p = PhysicalField::sample(g, |x1, x2| {
            (x1.cos() + 0.4 * (2.0 * x2).sin()) * (0.3 + (x1 + x2).cos())
        });
        let f = sops.to_spectral(&p);
        let area = g.area();
        let m2 = nops.l2(&f) / area.powf(0.5);
        let m4 = nops.lp(&f, 4).unwrap() / area.powf(0.25);
        let m8 = nops.lp(&f, 8).unwrap() / area.powf(0.125);
        let mi = nops.linf(&f);
        assert!(m2 <= m4 * (1.0 + 1e-12));
        assert!(m4 <= m8 * (1.0 + 1e-12));
        assert!(m8 <= mi * (1.0 + 1e-12));
    }

    #[test]
    fn quadrature_exactness_is_independent_of_extra_padding() {
        // L4 via the wired 2x grid vs quadrature on a 4x grid built by
        // hand; both exact, so they agree to round-off
        let n = 16usize;
        let g = grid(n);
        let mut nops = NormOps::new(g);
        let mut sops = SpectralOps::new(g);
        let w = {
            let p = PhysicalField::sample(g, |x1, x2| {
                (2.0 * x1).cos() + 0.7 * (x2.sin() + 0.2) * x1.cos()
            });
            sops.to_spectral(&p)
        };
        let got = nops.lp(&w, 4).unwrap();

        let big_n = 4 * n;
        let bg = grid(big_n);
        let mut big_ops = SpectralOps::new(bg);
        let mut embedded = SpectralField::zeros(bg);
        for (_, j1, j2) in g.modes() {
            embedded.set_coeff(j1, j2, w.coeff(j1, j2));
        }
        let values = big_ops.to_physical(&embedded).unwrap();
        let sum = math::pairwise_sum_fn(0, big_n * big_n, |i| {
            let v2 = values.values()[i] * values.values()[i];
            v2 * v2
        });
        let want = (g.area() * sum / (big_n * big_n) as f64).powf(0.25);
        assert!((got - want).abs() / want < 1e-13);
    }
}
