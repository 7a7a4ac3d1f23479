//! Time integration of the damped-driven vorticity equation
//!
//!   dw/dt + u.grad w = nu Lap w - mu w + F,   u = perp-grad inv-Lap w
//!
//! with an integrating-factor SSP-RK3 scheme. The stiff affine part
//! (nu Lap - mu plus the constant forcing) is integrated exactly per mode,
//! so the only stability constraint left is the advective CFL condition
//! and single-mode trajectories are reproduced to round-off.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{self, DiagnosticsEngine, DiagnosticsRecord};
use crate::field::{FieldError, SpectralField};
use crate::grid::GridSpec;
use crate::math;
use crate::spectral::{Complex64, SpectralOps};

/// Physical coefficients of the vorticity equation. Zero values are
/// permitted so conservation checks can run the undamped inviscid limit;
/// production runs use strictly positive ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub nu: f64,
    pub mu: f64,
}

impl PhysParams {
    pub fn new(nu: f64, mu: f64) -> Result<Self, SolverError> {
        if !(nu.is_finite() && mu.is_finite() && nu >= 0.0 && mu >= 0.0) {
            return Err(SolverError::Config(String::from(
                "nu and mu must be finite and non-negative",
            )));
        }
        Ok(PhysParams { nu, mu })
    }
}

/// One cosine component of the (time-independent, band-limited) forcing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingMode {
    pub k: (i64, i64),
    pub amplitude: f64,
    pub phase: f64,
}

/// F = sum of amplitude * cos(k.x + phase) over the listed modes.
/// An empty list is a valid unforced (decay) configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForcingSpec {
    pub modes: Vec<ForcingMode>,
}

impl ForcingSpec {
    pub fn single(k: (i64, i64), amplitude: f64) -> Self {
        ForcingSpec {
            modes: vec![ForcingMode {
                k,
                amplitude,
                phase: 0.0,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Config(String),
    /// Forcing mode at the named wave vector is outside the dealiased band.
    ForcingOutsideCutoff { k: (i64, i64) },
    ForcingZeroMode,
    ForcingNonFinite,
    Field(FieldError),
    /// The state left f64 range; `t` is the last time with finite data.
    BlowUp { t: f64 },
}

impl From<FieldError> for SolverError {
    fn from(e: FieldError) -> Self {
        SolverError::Field(e)
    }
}

impl core::fmt::Display for SolverError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolverError::Config(m) => write!(f, "invalid configuration: {m}"),
            SolverError::ForcingOutsideCutoff { k } => {
                write!(f, "forcing mode ({}, {}) lies outside the dealias cutoff", k.0, k.1)
            }
            SolverError::ForcingZeroMode => write!(f, "forcing must not drive the zero mode"),
            SolverError::ForcingNonFinite => write!(f, "forcing amplitudes must be finite"),
            SolverError::Field(e) => write!(f, "field error: {e:?}"),
            SolverError::BlowUp { t } => write!(f, "solution blew up; last valid time {t}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolverError {}

/// Assemble the spectral forcing field from its mode list.
pub fn build_forcing(spec: &ForcingSpec, grid: GridSpec) -> Result<SpectralField, SolverError> {
    let mut f = SpectralField::zeros(grid);
    for mode in &spec.modes {
        let (k1, k2) = mode.k;
        if k1 == 0 && k2 == 0 {
            return Err(SolverError::ForcingZeroMode);
        }
        if !grid.retained(k1, k2) {
            return Err(SolverError::ForcingOutsideCutoff { k: mode.k });
        }
        if !(mode.amplitude.is_finite() && mode.phase.is_finite()) {
            return Err(SolverError::ForcingNonFinite);
        }
        let half = 0.5 * mode.amplitude;
        let c = Complex64::new(half * math::cos(mode.phase), half * math::sin(mode.phase));
        f.add_mode_pair(k1, k2, c);
    }
    Ok(f)
}

/// Initial vorticity menu.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Zero,
    SingleMode { k: (i64, i64), amp: f64 },
    /// Isotropic spectrum |w_j| ~ |j|^slope e^{-|j|} with seeded uniform
    /// phases, normalized to unit L2 norm.
    Random { seed: u64, slope: f64 },
}

pub fn build_initial(initial: &Initial, grid: GridSpec) -> Result<SpectralField, SolverError> {
    match initial {
        Initial::Zero => Ok(SpectralField::zeros(grid)),
        Initial::SingleMode { k, amp } => {
            let spec = ForcingSpec::single(*k, *amp);
            build_forcing(&spec, grid)
        }
        Initial::Random { seed, slope } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut w = SpectralField::zeros(grid);
            let cutoff = grid.dealias_cutoff() as i64;
            // deterministic half-lattice sweep; the conjugate side follows
            for j1 in 0..=cutoff {
                let j2_range = if j1 == 0 { 1..=cutoff } else { -cutoff..=cutoff };
                for j2 in j2_range {
                    let r = math::sqrt((j1 * j1 + j2 * j2) as f64);
                    let amp = math::powf(r, *slope) * math::exp(-r);
                    let theta = rng.gen::<f64>() * core::f64::consts::TAU;
                    w.add_mode_pair(
                        j1,
                        j2,
                        Complex64::new(amp * math::cos(theta), amp * math::sin(theta)),
                    );
                }
            }
            let norm = grid.length() * math::sqrt(w.sum_sq());
            if norm > 0.0 {
                let scale = 1.0 / norm;
                let (re, im) = w.planes_mut();
                for v in re.iter_mut().chain(im.iter_mut()) {
                    *v *= scale;
                }
            }
            Ok(w)
        }
    }
}

/// Prognostic state: time and spectral vorticity.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub omega: SpectralField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dt {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub params: PhysParams,
    pub forcing: ForcingSpec,
    pub dt: Dt,
    pub t_end: f64,
    /// Transient discarded before attractor statistics are aggregated.
    pub spinup: f64,
    /// Diagnostic sampling cadence in steps.
    pub sample_every: usize,
    pub initial: Initial,
    pub checkpoint_every: Option<usize>,
    /// Cap of the Gevrey shift phi(t) used by diagnostics.
    pub sigma1: f64,
}

impl SimConfig {
    pub fn new(grid: GridSpec, params: PhysParams, forcing: ForcingSpec, t_end: f64) -> Self {
        let spinup = if params.mu > 0.0 { 10.0 / params.mu } else { 0.0 };
        SimConfig {
            grid,
            params,
            forcing,
            dt: Dt::Auto,
            t_end,
            spinup: if spinup < t_end { spinup } else { 0.0 },
            sample_every: 50,
            initial: Initial::Zero,
            checkpoint_every: None,
            sigma1: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if let Dt::Fixed(h) = self.dt {
            if !(h.is_finite() && h > 0.0) {
                return Err(SolverError::Config(String::from("dt must be positive")));
            }
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(SolverError::Config(String::from("t_end must be positive")));
        }
        if !(self.spinup.is_finite() && self.spinup >= 0.0 && self.spinup < self.t_end) {
            return Err(SolverError::Config(String::from(
                "spinup must satisfy 0 <= spinup < t_end",
            )));
        }
        if self.sample_every == 0 {
            return Err(SolverError::Config(String::from("sample_every must be >= 1")));
        }
        if !(self.sigma1.is_finite() && self.sigma1 > 0.0) {
            return Err(SolverError::Config(String::from("sigma1 must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub dt: f64,
    /// Max pointwise speed seen by this step's first advection evaluation.
    pub max_speed: f64,
}

/// Per-dt tables of the exact affine propagator. With z = lambda h,
/// lambda = nu |k|^2 + mu:
///   e_full  = e^{-z}          e_half = e^{-z/2}      e_grow = e^{+z/2}
///   f_full  = (1 - e^{-z})/lambda           (exact forcing response, h)
///   f_half  = same over h/2
///   f_three = (1 - e^{-z}/3 - 2 e^{-z/2}/3)/lambda   (final-stage response)
/// Small z switches to series to avoid cancellation; the z = 0 limits
/// (f_full -> h, f_three -> 2h/3) come out of the series automatically.
struct Tables {
    dt_bits: u64,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
    e_grow: Vec<f64>,
    f_full: Vec<f64>,
    f_half: Vec<f64>,
    f_three: Vec<f64>,
}

fn phi1_series(z: f64) -> f64 {
    // (1 - e^{-z})/z
    1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0 + z * z * z * z / 120.0
}

fn f_three_series(z: f64) -> f64 {
    // (1 - e^{-z}/3 - 2 e^{-z/2}/3)/z
    2.0 / 3.0 - z / 4.0 + 5.0 * z * z / 72.0 - z * z * z / 64.0
        + 17.0 * z * z * z * z / 5760.0
}

const SMALL_Z: f64 = 1e-2;

pub struct TimeStepper {
    ops: SpectralOps,
    params: PhysParams,
    forcing: SpectralField,
    lambda: Vec<f64>,
    tables: Tables,
    adv: SpectralField,
    stage_a: SpectralField,
    stage_w1: SpectralField,
    stage_w2: SpectralField,
}

impl TimeStepper {
    pub fn new(grid: GridSpec, params: PhysParams, forcing: &ForcingSpec) -> Result<Self, SolverError> {
        let forcing = build_forcing(forcing, grid)?;
        let s = core::f64::consts::TAU / grid.length();
        let mut lambda = vec![0.0; grid.n() * grid.n()];
        for (idx, j1, j2) in grid.modes() {
            lambda[idx] = params.nu * s * s * ((j1 * j1 + j2 * j2) as f64) + params.mu;
        }
        let empty = Tables {
            dt_bits: u64::MAX,
            e_full: Vec::new(),
            e_half: Vec::new(),
            e_grow: Vec::new(),
            f_full: Vec::new(),
            f_half: Vec::new(),
            f_three: Vec::new(),
        };
        Ok(TimeStepper {
            ops: SpectralOps::new(grid),
            params,
            forcing,
            lambda,
            tables: empty,
            adv: SpectralField::zeros(grid),
            stage_a: SpectralField::zeros(grid),
            stage_w1: SpectralField::zeros(grid),
            stage_w2: SpectralField::zeros(grid),
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.ops.grid()
    }

    pub fn params(&self) -> PhysParams {
        self.params
    }

    pub fn forcing_field(&self) -> &SpectralField {
        &self.forcing
    }

    pub fn ops_mut(&mut self) -> &mut SpectralOps {
        &mut self.ops
    }

    /// Max speed of the current state, for seeding the adaptive dt.
    pub fn probe_speed(&mut self, state: &State) -> Result<f64, SolverError> {
        Ok(self.ops.advect_into(&state.omega, &mut self.adv)?)
    }

    fn ensure_tables(&mut self, h: f64) {
        if self.tables.dt_bits == h.to_bits() {
            return;
        }
        let m = self.lambda.len();
        let t = &mut self.tables;
        t.e_full.clear();
        t.e_full.reserve(m);
        t.e_half.clear();
        t.e_half.reserve(m);
        t.e_grow.clear();
        t.e_grow.reserve(m);
        t.f_full.clear();
        t.f_full.reserve(m);
        t.f_half.clear();
        t.f_half.reserve(m);
        t.f_three.clear();
        t.f_three.reserve(m);
        for &lam in &self.lambda {
            let z = lam * h;
            let e_full = math::exp(-z);
            let e_half = math::exp(-z / 2.0);
            t.e_full.push(e_full);
            t.e_half.push(e_half);
            t.e_grow.push(math::exp(z / 2.0));
            if z < SMALL_Z {
                t.f_full.push(h * phi1_series(z));
                t.f_half.push(0.5 * h * phi1_series(z / 2.0));
                t.f_three.push(h * f_three_series(z));
            } else {
                t.f_full.push((1.0 - e_full) / lam);
                t.f_half.push((1.0 - e_half) / lam);
                t.f_three.push((1.0 - e_full / 3.0 - 2.0 * e_half / 3.0) / lam);
            }
        }
        t.dt_bits = h.to_bits();
    }

    /// Advance the state by h. Stages (E(h) = per-mode e^{-lambda h},
    /// N = minus the dealiased advection term):
    ///   a     = w + h N(w)
    ///   w1    = E(h) a + f_full F
    ///   w2    = E(h/2)(3/4 w + 1/4 a) + f_half F + (h/4) E(-h/2) N(w1)
    ///   w_new = 1/3 E(h) w + 2/3 E(h/2) w2 + (2h/3) E(h/2) N(w2) + f_three F
    /// For N = 0 this telescopes to the exact affine flow over h.
    pub fn step(&mut self, state: &mut State, h: f64) -> Result<StepStats, SolverError> {
        let t_before = state.t;
        self.ensure_tables(h);
        let max_speed = self.ops.advect_into(&state.omega, &mut self.adv)?;

        let m = self.lambda.len();
        let t = &self.tables;
        let (f_re, f_im) = self.forcing.planes();
        {
            let (w_re, w_im) = state.omega.planes();
            let (adv_re, adv_im) = self.adv.planes();
            let (a_re, a_im) = self.stage_a.planes_mut();
            let (w1_re, w1_im) = self.stage_w1.planes_mut();
            for i in 0..m {
                let ar = w_re[i] - h * adv_re[i];
                let ai = w_im[i] - h * adv_im[i];
                a_re[i] = ar;
                a_im[i] = ai;
                w1_re[i] = t.e_full[i] * ar + t.f_full[i] * f_re[i];
                w1_im[i] = t.e_full[i] * ai + t.f_full[i] * f_im[i];
            }
        }

        self.ops.advect_into(&self.stage_w1, &mut self.adv)?;
        {
            let (w_re, w_im) = state.omega.planes();
            let (a_re, a_im) = self.stage_a.planes();
            let (adv_re, adv_im) = self.adv.planes();
            let (w2_re, w2_im) = self.stage_w2.planes_mut();
            let q = h / 4.0;
            for i in 0..m {
                let br = 0.75 * w_re[i] + 0.25 * a_re[i];
                let bi = 0.75 * w_im[i] + 0.25 * a_im[i];
                w2_re[i] = t.e_half[i] * br + t.f_half[i] * f_re[i] - q * t.e_grow[i] * adv_re[i];
                w2_im[i] = t.e_half[i] * bi + t.f_half[i] * f_im[i] - q * t.e_grow[i] * adv_im[i];
            }
        }

        self.ops.advect_into(&self.stage_w2, &mut self.adv)?;
        {
            let (adv_re, adv_im) = self.adv.planes();
            let (w2_re, w2_im) = self.stage_w2.planes();
            let (w_re, w_im) = state.omega.planes_mut();
            let third = 1.0 / 3.0;
            let two_thirds = 2.0 / 3.0;
            let r = 2.0 * h / 3.0;
            for i in 0..m {
                w_re[i] = third * t.e_full[i] * w_re[i] + two_thirds * t.e_half[i] * w2_re[i]
                    - r * t.e_half[i] * adv_re[i]
                    + t.f_three[i] * f_re[i];
                w_im[i] = third * t.e_full[i] * w_im[i] + two_thirds * t.e_half[i] * w2_im[i]
                    - r * t.e_half[i] * adv_im[i]
                    + t.f_three[i] * f_im[i];
            }
        }

        state.t = t_before + h;
        if !state.omega.is_finite() || !max_speed.is_finite() {
            return Err(SolverError::BlowUp { t: t_before });
        }
        Ok(StepStats { dt: h, max_speed })
    }
}

/// Hooks a caller can attach to a run; default implementations ignore
/// everything.
pub trait RunObserver {
    fn on_record(&mut self, _record: &DiagnosticsRecord) {}
    fn on_checkpoint(&mut self, _step: usize, _state: &State) {}
}

pub struct NullObserver;

impl RunObserver for NullObserver {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: State,
    /// Median of accepted per-snapshot radii over the post-spinup window.
    pub radius_median: Option<f64>,
    pub accepted_samples: usize,
    /// True if the post-spinup spectrum tail ever rose above the
    /// resolution-adequacy threshold.
    pub under_resolved: bool,
}

/// A run that left f64 range; diagnostics up to the failure are retained.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowUp {
    pub t: f64,
    pub records: Vec<DiagnosticsRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// Configuration rejected before any stepping happened.
    Invalid(SolverError),
    BlowUp(BlowUp),
}

impl core::fmt::Display for RunError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RunError::Invalid(e) => write!(f, "{e}"),
            RunError::BlowUp(b) => write!(f, "solution left f64 range at t = {}", b.t),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RunError {}

const TAIL_RATIO_LIMIT: f64 = 1e-10;

pub fn run(cfg: &SimConfig) -> Result<RunResult, RunError> {
    run_with_observer(cfg, &mut NullObserver)
}

pub fn run_with_observer(cfg: &SimConfig, obs: &mut dyn RunObserver) -> Result<RunResult, RunError> {
    cfg.validate().map_err(RunError::Invalid)?;
    let mut stepper =
        TimeStepper::new(cfg.grid, cfg.params, &cfg.forcing).map_err(RunError::Invalid)?;
    let omega = build_initial(&cfg.initial, cfg.grid).map_err(RunError::Invalid)?;
    let mut diag = DiagnosticsEngine::new(cfg.grid, cfg.params, stepper.forcing_field().clone(), cfg.sigma1);
    let mut state = State { t: 0.0, omega };

    let mut records = Vec::new();
    let first = diag.record(&state);
    obs.on_record(&first);
    records.push(first);

    let dx = cfg.grid.dx();
    let auto = matches!(cfg.dt, Dt::Auto);
    let mut last_speed = match stepper.probe_speed(&state) {
        Ok(s) => s,
        Err(_) => return Err(RunError::BlowUp(BlowUp { t: 0.0, records })),
    };
    let mut dt = match cfg.dt {
        Dt::Fixed(h) => h,
        Dt::Auto => 0.5 * dx / last_speed.max(1.0),
    };

    let mut step_idx: usize = 0;
    loop {
        let remaining = cfg.t_end - state.t;
        if remaining <= cfg.t_end * 1e-14 {
            break;
        }
        if auto && step_idx > 0 && step_idx % 10 == 0 {
            dt = 0.5 * dx / last_speed.max(1.0);
        }
        let final_step = remaining <= dt * (1.0 + 1e-12);
        let h = if final_step { remaining } else { dt };
        match stepper.step(&mut state, h) {
            Ok(stats) => last_speed = stats.max_speed,
            Err(SolverError::BlowUp { t }) => {
                diagnostics::annotate_budget_residuals(&mut records, cfg.params.nu, cfg.params.mu);
                return Err(RunError::BlowUp(BlowUp { t, records }));
            }
            Err(_) => {
                diagnostics::annotate_budget_residuals(&mut records, cfg.params.nu, cfg.params.mu);
                return Err(RunError::BlowUp(BlowUp { t: state.t, records }));
            }
        }
        if final_step {
            state.t = cfg.t_end;
        }
        step_idx += 1;
        if step_idx % cfg.sample_every == 0 {
            let rec = diag.record(&state);
            obs.on_record(&rec);
            records.push(rec);
        }
        if let Some(k) = cfg.checkpoint_every {
            if k > 0 && step_idx % k == 0 {
                obs.on_checkpoint(step_idx, &state);
            }
        }
    }
    if records.last().map(|r| r.t < cfg.t_end).unwrap_or(true) {
        let rec = diag.record(&state);
        obs.on_record(&rec);
        records.push(rec);
    }
    diagnostics::annotate_budget_residuals(&mut records, cfg.params.nu, cfg.params.mu);

    let mut accepted: Vec<f64> = Vec::new();
    let mut under_resolved = false;
    for rec in records.iter().filter(|r| r.t >= cfg.spinup) {
        if rec.tail_ratio > TAIL_RATIO_LIMIT {
            under_resolved = true;
        }
        if let Some(est) = &rec.radius {
            if est.accepted {
                accepted.push(est.l_a);
            }
        }
    }
    let radius_median = median(&mut accepted);
    Ok(RunResult {
        accepted_samples: accepted.len(),
        records,
        final_state: state,
        radius_median,
        under_resolved,
    })
}

pub(crate) fn median(values: &mut Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
    let m = values.len();
    Some(if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    })
}
