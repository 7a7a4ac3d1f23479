//! Closed-form bounds and dimensionless numbers for the damped-driven
//! vorticity equation, as pure functions of run parameters.
//!
//! Two families are evaluated. The classical (undamped) family is
//! controlled by the Grashof number G = ||f||_L2 |O|/nu^2; the damped
//! family by D = ||rot f||_inf |O|/(mu nu) and by a Gevrey-weighted
//! forcing number D1. Absolute constants the theory leaves abstract are
//! configurable inputs defaulting to 1; the few with stated numeric
//! values default to those. Logs are natural and clamped below at e so
//! the small-data regime stays finite.

use serde::Serialize;

use crate::field::SpectralField;
use crate::math;
use crate::norm::{NormError, NormOps};
use crate::solver::{ForcingSpec, PhysParams};

/// Tunable absolute constants. `c2`, `c4`, `c5` carry their stated
/// values; everything else defaults to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c: 1.0,
            c1: 1.0,
            c2: math::sqrt(68.0 / core::f64::consts::PI),
            c3: 1.0,
            c4: 12.0,
            c5: math::powf(68.0, 0.25),
            c6: 1.0,
            c7: 1.0,
            c8: 1.0,
            big_c: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dimensionless {
    /// G = ||f||_L2 |O| / nu^2.
    #[serde(rename = "G")]
    pub grashof: f64,
    /// D = ||rot f||_inf |O| / (mu nu).
    #[serde(rename = "D")]
    pub damped: f64,
    /// D1 = (Gevrey norm of rot f at shift sigma1) / (lambda_1 nu^{3/2} mu^{1/2}).
    #[serde(rename = "D1")]
    pub forcing_gevrey: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundsError {
    ZeroForcing,
    NonPositiveParams,
    GevreyOverflow { shell: usize },
    NegativeStripWidth,
    BadGronwallTerm { index: usize },
    BadExponent,
}

impl core::fmt::Display for BoundsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BoundsError::ZeroForcing => write!(f, "dimensionless numbers need nontrivial forcing"),
            BoundsError::NonPositiveParams => write!(f, "nu and mu must be strictly positive here"),
            BoundsError::GevreyOverflow { shell } => {
                write!(f, "forcing Gevrey weight overflowed at shell {shell}")
            }
            BoundsError::NegativeStripWidth => write!(f, "strip half-width must be non-negative"),
            BoundsError::BadGronwallTerm { index } => {
                write!(f, "term {index} violates K > 0, alpha > -1, gamma >= 0")
            }
            BoundsError::BadExponent => write!(f, "p must be at least 3/2"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for BoundsError {}

/// G, D and D1 from the spectral forcing field. `forcing` holds rot f;
/// the velocity-level norm ||f||_L2 follows from |f_j| = |F_j|/|k_j|.
pub fn dimensionless(
    params: PhysParams,
    forcing: &SpectralField,
    sigma1: f64,
) -> Result<Dimensionless, BoundsError> {
    if !(params.nu > 0.0 && params.mu > 0.0) {
        return Err(BoundsError::NonPositiveParams);
    }
    if forcing.max_abs() == 0.0 {
        return Err(BoundsError::ZeroForcing);
    }
    let grid = forcing.grid();
    let area = grid.area();
    let s = core::f64::consts::TAU / grid.length();

    let mut norms = NormOps::new(grid);
    let f_inf = norms.linf(forcing);

    let (re, im) = forcing.planes();
    let mut vel_sq = 0.0;
    for (idx, j1, j2) in grid.modes() {
        if j1 == 0 && j2 == 0 {
            continue;
        }
        let a2 = re[idx] * re[idx] + im[idx] * im[idx];
        if a2 != 0.0 {
            vel_sq += a2 / ((s * s) * (j1 * j1 + j2 * j2) as f64);
        }
    }
    let f_l2 = math::sqrt(area * vel_sq);

    let half_gevrey = norms
        .gevrey(forcing, sigma1 * s, 0.5, 0.0)
        .map_err(|e| match e {
            NormError::Overflow { shell } => BoundsError::GevreyOverflow { shell },
            NormError::UnsupportedExponent(_) => unreachable!("gevrey has no exponent"),
        })?;

    let lambda1 = grid.lambda_1();
    Ok(Dimensionless {
        grashof: f_l2 * area / (params.nu * params.nu),
        damped: f_inf * area / (params.mu * params.nu),
        forcing_gevrey: half_gevrey
            / (lambda1 * math::powf(params.nu, 1.5) * math::sqrt(params.mu)),
    })
}

/// Bounds of the classical (mu-free) theory, as functions of G.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalBounds {
    /// Gevrey-route analyticity radius, ~ G^{-2}/log G.
    pub la_gevrey: f64,
    /// Lp-route analyticity radius, ~ G^{-1/2}(1+log G)^{-1/4}.
    pub la_lp: f64,
    /// Determining-node spacing from the N <= c2 G node count.
    pub l_nodes: f64,
    /// Attractor dimension estimate c1 G^{2/3}(log(1+G))^{1/3}.
    pub dim: f64,
    /// Dissipation length |O|^{1/2} G^{-1/3}.
    pub l_f: f64,
}

pub fn classical_bounds(d: &Dimensionless, area: f64, k: &Constants) -> ClassicalBounds {
    let g = d.grashof;
    let root_area = math::sqrt(area);
    ClassicalBounds {
        la_gevrey: k.c * root_area / (g * g * math::ln_clamped(g)),
        la_lp: k.c3 * root_area / (math::sqrt(g) * math::powf(1.0 + math::ln_clamped(g), 0.25)),
        l_nodes: math::sqrt(area / (k.c2 * g)),
        dim: k.c1 * math::powf(g, 2.0 / 3.0) * math::powf(math::ln_clamped(1.0 + g), 1.0 / 3.0),
        l_f: root_area * math::powf(g, -1.0 / 3.0),
    }
}

/// Bounds of the damped theory, as functions of D (and D1 for the
/// Gevrey route).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampedBounds {
    /// Attractor dimension bound c4 D.
    pub dim: f64,
    /// Dissipation length sqrt(|O|/D).
    pub l_f: f64,
    /// Determining-node spacing c5 sqrt(|O|/D).
    pub l_dn: f64,
    /// Gevrey-route analyticity radius, capped by sigma1.
    pub la_gevrey: f64,
    /// Lp-route analyticity radius |O|^{1/2}/(C D^{1/2}(1+log D)^{1/2});
    /// the headline lower bound for the measured radius.
    pub la_lp: f64,
}

pub fn damped_bounds(d: &Dimensionless, area: f64, sigma1: f64, k: &Constants) -> DampedBounds {
    let dd = d.damped;
    let root_area = math::sqrt(area);
    let gev_arg = dd * dd + d.forcing_gevrey + 1.0;
    let la_gevrey_raw = k.c7 * root_area / (gev_arg * math::ln_clamped(gev_arg));
    DampedBounds {
        dim: k.c4 * dd,
        l_f: math::sqrt(area / dd),
        l_dn: k.c5 * math::sqrt(area / dd),
        la_gevrey: if la_gevrey_raw < sigma1 { la_gevrey_raw } else { sigma1 },
        la_lp: root_area / (k.big_c * math::sqrt(dd) * math::sqrt(1.0 + math::ln_clamped(dd))),
    }
}

/// Everything in one serializable report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub area: f64,
    pub sigma1: f64,
    pub dimensionless: Dimensionless,
    pub classical: ClassicalBounds,
    pub damped: DampedBounds,
    pub constants: Constants,
}

pub fn full_report(
    params: PhysParams,
    forcing: &SpectralField,
    sigma1: f64,
    constants: &Constants,
) -> Result<BoundsReport, BoundsError> {
    let d = dimensionless(params, forcing, sigma1)?;
    let area = forcing.grid().area();
    Ok(BoundsReport {
        area,
        sigma1,
        dimensionless: d,
        classical: classical_bounds(&d, area, constants),
        damped: damped_bounds(&d, area, sigma1, constants),
        constants: *constants,
    })
}

/// Sup of the complexified forcing magnitude over the strip |y| <= delta_f.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripBound {
    pub m_f: f64,
    /// True for at most one cosine mode, where the sup is attained;
    /// otherwise the value is a triangle-inequality upper bound.
    pub exact: bool,
}

/// For a single mode amp cos(k.x + phase) the strip sup is
/// |amp| cosh(|k| delta_f); sums are bounded by the sum of their
/// single-mode sups.
pub fn forcing_strip_bound(spec: &ForcingSpec, delta_f: f64) -> Result<StripBound, BoundsError> {
    if !(delta_f >= 0.0) {
        return Err(BoundsError::NegativeStripWidth);
    }
    let mut m_f = 0.0;
    for mode in &spec.modes {
        let k_abs = math::hypot(mode.k.0 as f64, mode.k.1 as f64);
        m_f += math::abs(mode.amplitude) * math::cosh(k_abs * delta_f);
    }
    Ok(StripBound { m_f, exact: spec.modes.len() <= 1 })
}

/// Horizon up to which the strip growth formula below applies:
/// t0 = M_{2p}^2 / (C M_F^2 / mu).
pub fn strip_time_horizon(m2p: f64, m_f: f64, mu: f64, big_c: f64) -> f64 {
    mu * m2p * m2p / (big_c * m_f * m_f)
}

/// Guaranteed analyticity radius at time t on 0 < t <= t0:
/// the minimum of sqrt(t)/C, 1/(C p t^{(2p-3)/4p} M),
/// 1/(C p t^{(2p-3)/(4p+6)} M^{2p/(2p+3)}), 1/(p sqrt(t) M), delta_f.
pub fn strip_radius_at(
    t: f64,
    p: f64,
    m2p: f64,
    delta_f: f64,
    big_c: f64,
) -> Result<f64, BoundsError> {
    if !(p >= 1.5) {
        return Err(BoundsError::BadExponent);
    }
    if !(delta_f >= 0.0) {
        return Err(BoundsError::NegativeStripWidth);
    }
    let root_t = math::sqrt(t);
    let e1 = (2.0 * p - 3.0) / (4.0 * p);
    let e2 = (2.0 * p - 3.0) / (4.0 * p + 6.0);
    let e3 = 2.0 * p / (2.0 * p + 3.0);
    let terms = [
        root_t / big_c,
        1.0 / (big_c * p * math::powf(t, e1) * m2p),
        1.0 / (big_c * p * math::powf(t, e2) * math::powf(m2p, e3)),
        1.0 / (p * root_t * m2p),
        delta_f,
    ];
    Ok(terms.iter().cloned().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallTerm {
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Admissible time from a sum of power-law growth terms: the minimum
/// over terms of ((alpha+1)/(N K 2^{beta^+ + gamma} M^{beta+gamma-1}))
/// ^{1/(alpha+1)}, capped by `t_cap`.
pub fn gronwall_time(
    terms: &[GronwallTerm],
    m: f64,
    n_factor: f64,
    t_cap: f64,
) -> Result<f64, BoundsError> {
    let mut best = t_cap;
    for (index, term) in terms.iter().enumerate() {
        if !(term.k > 0.0 && term.alpha > -1.0 && term.gamma >= 0.0) {
            return Err(BoundsError::BadGronwallTerm { index });
        }
        let beta_plus = if term.beta > 0.0 { term.beta } else { 0.0 };
        let denom = n_factor
            * term.k
            * math::powf(2.0, beta_plus + term.gamma)
            * math::powf(m, term.beta + term.gamma - 1.0);
        let candidate = math::powf((term.alpha + 1.0) / denom, 1.0 / (term.alpha + 1.0));
        if candidate < best {
            best = candidate;
        }
    }
    Ok(best)
}

/// N_dn translated from node spacing to a mode count: |O| / l_dn^2,
/// which is D / sqrt(68) at the default c5.
pub fn determining_mode_prediction(d: &Dimensionless) -> f64 {
    d.damped / math::sqrt(68.0)
}
