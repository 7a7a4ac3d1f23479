//! Per-snapshot measurements: integral quantities, Lp norms, the shifted
//! Gevrey norm, the spectral analyticity-radius estimate, and energy
//! budget residuals, plus trajectory-level checks against the damping
//! bound.

use alloc::vec::Vec;

use serde::Serialize;

use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::math;
use crate::norm::NormOps;
use crate::solver::{PhysParams, State};
use crate::spectral::SpectralOps;

/// Controls for the log-linear shell-spectrum fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusFitOptions {
    /// Window starts at the first shell at or below this fraction of the
    /// spectrum peak (excludes the energy-containing range).
    pub upper_rel: f64,
    /// Window ends at the last shell at or above this fraction of the
    /// peak (excludes the round-off floor).
    pub lower_rel: f64,
    /// Hard cap on the last usable shell, if any.
    pub max_shell: Option<usize>,
    pub min_shells: usize,
    pub min_r2: f64,
    /// Multiplies the fitted per-shell rate into a physical length.
    pub length_per_shell: f64,
}

impl Default for RadiusFitOptions {
    fn default() -> Self {
        RadiusFitOptions {
            upper_rel: 1e-2,
            lower_rel: 1e-13,
            max_shell: None,
            min_shells: 5,
            min_r2: 0.98,
            length_per_shell: 1.0,
        }
    }
}

impl RadiusFitOptions {
    /// Production options for a given grid: keep two shells of margin to
    /// the dealias cutoff and report the radius in domain length units.
    pub fn for_grid(grid: GridSpec) -> Self {
        RadiusFitOptions {
            max_shell: Some(grid.dealias_cutoff().saturating_sub(2)),
            length_per_shell: grid.length() / core::f64::consts::TAU,
            ..RadiusFitOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusEstimate {
    /// Fitted exponential decay rate of the shell maxima, as a length.
    pub l_a: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (usize, usize),
    pub accepted: bool,
}

fn rejected() -> RadiusEstimate {
    RadiusEstimate { l_a: 0.0, intercept: 0.0, r2: 0.0, window: (0, 0), accepted: false }
}

/// Least-squares fit of ln S(kappa) = intercept - rate * kappa over the
/// dissipation-range window. Quality problems surface as
/// `accepted = false`, never as an error.
pub fn estimate_radius(spectrum: &[f64], opts: &RadiusFitOptions) -> RadiusEstimate {
    if spectrum.is_empty() {
        return rejected();
    }
    let peak = spectrum.iter().cloned().fold(0.0f64, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return rejected();
    }
    let cap = {
        let end = spectrum.len() - 1;
        match opts.max_shell {
            Some(m) if m < end => m,
            _ => end,
        }
    };
    let lo = match (0..=cap).find(|&k| spectrum[k] <= opts.upper_rel * peak) {
        Some(k) => k,
        None => return rejected(),
    };
    let hi = match (lo..=cap).rev().find(|&k| spectrum[k] >= opts.lower_rel * peak) {
        Some(k) => k,
        None => return rejected(),
    };

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for k in lo..=hi {
        if spectrum[k] > 0.0 {
            xs.push(k as f64);
            ys.push(math::ln(spectrum[k]));
        }
    }
    let m = xs.len();
    if m < 2 {
        return rejected();
    }
    let mf = m as f64;
    let mean_x = xs.iter().sum::<f64>() / mf;
    let mean_y = ys.iter().sum::<f64>() / mf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..m {
        let dx = xs[i] - mean_x;
        let dy = ys[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return rejected();
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = (syy - sxy * sxy / sxx).max(0.0);
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 0.0 };
    let l_a = -slope * opts.length_per_shell;
    let accepted = m >= opts.min_shells && r2 >= opts.min_r2 && l_a > 0.0;
    RadiusEstimate { l_a, intercept, r2, window: (lo, hi), accepted }
}

/// An accepted radius larger than the half-period cannot be physical on
/// a periodic domain; callers should flag (not discard) such fits.
pub fn fit_artifact(estimate: &RadiusEstimate, grid: GridSpec) -> bool {
    estimate.accepted && estimate.l_a > grid.length() / 2.0
}

/// One diagnostics sample. Radius and Gevrey entries are absent (not
/// errors) when the fit has no usable window or the weighted sum leaves
/// f64 range. `budget_residual` is filled in post hoc from neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Half the squared L2 norm of velocity.
    pub energy: f64,
    /// Half the squared L2 norm of vorticity.
    pub enstrophy: f64,
    pub l2: f64,
    pub l4: f64,
    pub l8: f64,
    pub linf: f64,
    pub gevrey_half: Option<f64>,
    pub radius: Option<RadiusEstimate>,
    /// Instantaneous power input by the forcing.
    pub injection: f64,
    /// Spectrum tail over peak; the resolution-adequacy monitor.
    pub tail_ratio: f64,
    /// Relative residual of d/dt energy = -2 nu Z - 2 mu E + injection.
    pub budget_residual: Option<f64>,
}

pub struct DiagnosticsEngine {
    ops: SpectralOps,
    norms: NormOps,
    forcing: SpectralField,
    params: PhysParams,
    sigma1: f64,
    fit: RadiusFitOptions,
}

impl DiagnosticsEngine {
    pub fn new(grid: GridSpec, params: PhysParams, forcing: SpectralField, sigma1: f64) -> Self {
        DiagnosticsEngine {
            ops: SpectralOps::new(grid),
            norms: NormOps::new(grid),
            forcing,
            params,
            sigma1,
            fit: RadiusFitOptions::for_grid(grid),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.ops.grid()
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    /// The Gevrey shift: phi(t) = min(nu sqrt(lambda_1) t, sigma1).
    pub fn phi(&self, t: f64) -> f64 {
        let ramp = self.params.nu * math::sqrt(self.grid().lambda_1()) * t;
        if ramp < self.sigma1 {
            ramp
        } else {
            self.sigma1
        }
    }

    /// Shifted Gevrey norm of the vorticity: per-mode weight
    /// e^{phi sqrt(lambda_j)}. None when the weighted sum overflows.
    pub fn gevrey_shifted(&mut self, omega: &SpectralField, phi: f64) -> Option<f64> {
        let per_shell = phi * core::f64::consts::TAU / self.grid().length();
        self.norms.gevrey(omega, per_shell, 0.5, 0.0).ok()
    }

    pub fn record(&mut self, state: &State) -> DiagnosticsRecord {
        let w = &state.omega;
        let l2 = self.norms.l2(w);
        let l4 = self.norms.lp(w, 4).expect("wired exponent");
        let l8 = self.norms.lp(w, 8).expect("wired exponent");
        let linf = self.norms.linf(w);
        let phi = self.phi(state.t);
        let gevrey_half = {
            let per_shell = phi * core::f64::consts::TAU / self.grid().length();
            self.norms.gevrey(w, per_shell, 0.5, 0.0).ok()
        };
        let energy = 0.5 * self.ops.inner_inv_laplacian(w, w);
        let enstrophy = 0.5 * l2 * l2;
        let injection = self.ops.inner_inv_laplacian(&self.forcing, w);
        let spectrum = self.ops.shell_spectrum(w);
        let peak = spectrum.iter().cloned().fold(0.0f64, f64::max);
        let tail_ratio = if peak > 0.0 { spectrum[spectrum.len() - 1] / peak } else { 0.0 };
        let radius = if peak > 0.0 { Some(estimate_radius(&spectrum, &self.fit)) } else { None };
        DiagnosticsRecord {
            t: state.t,
            energy,
            enstrophy,
            l2,
            l4,
            l8,
            linf,
            gevrey_half,
            radius,
            injection,
            tail_ratio,
            budget_residual: None,
        }
    }

    /// Shifted-norm series along a stretch of states, with time rebased
    /// to the first entry; reports the first overflow time if any.
    pub fn gevrey_envelope(&mut self, states: &[State]) -> GevreyEnvelope {
        let t0 = states.first().map(|s| s.t).unwrap_or(0.0);
        let mut points = Vec::with_capacity(states.len());
        let mut first_overflow = None;
        for s in states {
            let t = s.t - t0;
            let value = self.gevrey_shifted(&s.omega, self.phi(t));
            if value.is_none() && first_overflow.is_none() {
                first_overflow = Some(t);
            }
            points.push((t, value));
        }
        GevreyEnvelope { points, first_overflow }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GevreyEnvelope {
    pub points: Vec<(f64, Option<f64>)>,
    pub first_overflow: Option<f64>,
}

/// Fill interior budget residuals by centered differences: the relative
/// defect of d/dt(energy) = -2 nu enstrophy - 2 mu energy + injection.
/// Endpoints stay absent.
pub fn annotate_budget_residuals(records: &mut [DiagnosticsRecord], nu: f64, mu: f64) {
    if records.len() < 3 {
        return;
    }
    for i in 1..records.len() - 1 {
        let dt = records[i + 1].t - records[i - 1].t;
        if !(dt > 0.0) {
            continue;
        }
        let de = (records[i + 1].energy - records[i - 1].energy) / dt;
        let sink = -2.0 * nu * records[i].enstrophy - 2.0 * mu * records[i].energy;
        let rhs = sink + records[i].injection;
        let scale = de
            .abs()
            .max((2.0 * nu * records[i].enstrophy).abs())
            .max((2.0 * mu * records[i].energy).abs())
            .max(records[i].injection.abs());
        let residual = if scale > 0.0 { (de - rhs) / scale } else { 0.0 };
        records[i].budget_residual = Some(residual);
    }
}

/// Which Lp entry of a record a trajectory check reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpKind {
    L2,
    L4,
    L8,
    LInf,
}

impl LpKind {
    pub fn of(self, rec: &DiagnosticsRecord) -> f64 {
        match self {
            LpKind::L2 => rec.l2,
            LpKind::L4 => rec.l4,
            LpKind::L8 => rec.l8,
            LpKind::LInf => rec.linf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMargin {
    pub t: f64,
    /// Bound value minus measured norm; negative means violation.
    pub margin: f64,
    pub flagged: bool,
}

/// Damping (Gronwall) bound along a trajectory:
/// ||w(t)||_p <= ||w(0)||_p e^{-mu t} + ||F||_p (1 - e^{-mu t})/mu,
/// with time measured from the first record. Margins below
/// -1e-6 * scale are flagged.
pub fn check_vorticity_bound(
    records: &[DiagnosticsRecord],
    forcing_lp: f64,
    mu: f64,
    which: LpKind,
) -> Vec<BoundMargin> {
    let mut out = Vec::with_capacity(records.len());
    let Some(first) = records.first() else {
        return out;
    };
    let w0 = which.of(first);
    let t0 = first.t;
    let tol_scale = if mu > 0.0 && forcing_lp > 0.0 { forcing_lp / mu } else { w0 };
    for rec in records {
        let dt = rec.t - t0;
        let decay = math::exp(-mu * dt);
        let forced = if mu > 0.0 {
            forcing_lp * (1.0 - decay) / mu
        } else {
            forcing_lp * dt
        };
        let bound = w0 * decay + forced;
        let margin = bound - which.of(rec);
        out.push(BoundMargin { t: rec.t, margin, flagged: margin < -1e-6 * tol_scale });
    }
    out
}
