//! End-to-end acceptance gate. One test walks the eight criteria in order
//! and prints a `[PASS]`/`[FAIL]` line per criterion straight to the
//! process stdout (the harness captures `println!`, and these lines must
//! show up in piped logs either way). Failures are collected so every
//! criterion still reports, then asserted at the end.
//!
//! The long criteria (3, 5, 6) are sized for a single CPU core; their
//! wall-clock caps are part of the checks.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use gevlab_core::bounds::{
    classical_bounds, damped_bounds, determining_mode_prediction, dimensionless,
    forcing_strip_bound, full_report, gronwall_time, strip_radius_at, Constants, Dimensionless,
    GronwallTerm,
};
use gevlab_core::diagnostics::{
    check_vorticity_bound, estimate_radius, LpKind, RadiusFitOptions,
};
use gevlab_core::experiments::{count_modes_within, determining_modes_from, SyncResult};
use gevlab_core::norm::NormOps;
use gevlab_core::solver::{
    build_forcing, build_initial, run, ForcingMode, ForcingSpec, Initial, PhysParams, RunResult,
    SimConfig, State, TimeStepper,
};
use gevlab_core::{Complex64, GridSpec, SpectralField, SpectralOps};

type Crit = (bool, String);

fn report(line: &str) {
    let mut out = std::io::stdout();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn guarded<F: FnOnce() -> Crit>(f: F) -> Crit {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(payload) => {
            let text = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("opaque panic payload");
            (false, format!("panicked: {text}"))
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Relative L2 distance between two spectral fields, scaled by `b`.
fn rel_l2_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let grid = a.grid();
    let mut num = 0.0;
    let mut den = 0.0;
    for (_, j1, j2) in grid.modes() {
        let ca = a.coeff(j1, j2);
        let cb = b.coeff(j1, j2);
        num += (ca.re - cb.re).powi(2) + (ca.im - cb.im).powi(2);
        den += cb.re * cb.re + cb.im * cb.im;
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

fn gevlab_bin() -> &'static str {
    env!("CARGO_BIN_EXE_gevlab")
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(gevlab_bin())
        .args(args)
        .output()
        .expect("spawn gevlab binary")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write config");
    path
}

macro_rules! req {
    ($e:expr, $what:literal) => {
        match $e {
            Ok(v) => v,
            Err(err) => return (false, format!(concat!($what, " failed: {}"), err)),
        }
    };
}

// criterion 1: spectral identities on a generic band-limited field.
fn c1_spectral_identities() -> Crit {
    let grid = req!(GridSpec::two_pi(64), "grid");
    let mut ops = SpectralOps::new(grid);
    let w = req!(
        build_initial(&Initial::Random { seed: 42, slope: -1.0 }, grid),
        "random field"
    );

    let div = ops.max_divergence(&w);
    if div != 0.0 {
        return (false, format!("velocity divergence is {div:.3e}, want exactly 0"));
    }

    // Parseval: grid mean of w^2 equals the coefficient power sum.
    let phys = req!(ops.to_physical(&w), "synthesis");
    let n2 = (grid.n() * grid.n()) as f64;
    let mean_sq = phys.values().iter().map(|v| v * v).sum::<f64>() / n2;
    let parseval = rel(mean_sq, w.sum_sq());
    if parseval > 1e-12 {
        return (false, format!("Parseval mismatch {parseval:.3e} > 1e-12"));
    }

    // Advection must inject neither enstrophy nor energy.
    let adv = req!(ops.advect(&w), "advection");
    let scale = ops.inner(&w, &w);
    let enstrophy_leak = ops.inner(&adv.term, &w).abs() / scale;
    let energy_leak = ops.inner_inv_laplacian(&adv.term, &w).abs() / scale;
    if enstrophy_leak > 1e-10 || energy_leak > 1e-10 {
        return (
            false,
            format!("advection leaks: enstrophy {enstrophy_leak:.3e}, energy {energy_leak:.3e}"),
        );
    }

    // 8x8 analysis against a direct O(n^4) transform.
    let g8 = req!(GridSpec::two_pi(8), "8x8 grid");
    let mut ops8 = SpectralOps::new(g8);
    let mut values = Vec::with_capacity(64);
    for i1 in 0..8usize {
        for i2 in 0..8usize {
            let x = (13 * i1 + 7 * i2) as f64;
            values.push(x.sin() + 0.3 * (0.7 * i1 as f64 - 1.1 * i2 as f64).cos());
        }
    }
    let p8 = req!(
        gevlab_core::PhysicalField::from_values(g8, values.clone()),
        "8x8 field"
    );
    let s8 = ops8.to_spectral(&p8);
    let mut dft_err = 0.0f64;
    for (_, j1, j2) in g8.modes() {
        let mut acc_re = 0.0;
        let mut acc_im = 0.0;
        for i1 in 0..8usize {
            for i2 in 0..8usize {
                let angle = -core::f64::consts::TAU * ((j1 * i1 as i64 + j2 * i2 as i64) as f64)
                    / 8.0;
                let v = values[i1 * 8 + i2];
                acc_re += v * angle.cos();
                acc_im += v * angle.sin();
            }
        }
        let c = s8.coeff(j1, j2);
        dft_err = dft_err
            .max((c.re - acc_re / 64.0).abs())
            .max((c.im - acc_im / 64.0).abs());
    }
    if dft_err > 1e-12 {
        return (false, format!("8x8 DFT oracle mismatch {dft_err:.3e} > 1e-12"));
    }

    (
        true,
        format!(
            "divergence exactly 0, Parseval {parseval:.1e}, orthogonality {enstrophy_leak:.1e}/{energy_leak:.1e}, DFT oracle {dft_err:.1e}"
        ),
    )
}

// criterion 2: closed-form single-mode solution, steady Euler state,
// temporal self-convergence.
fn c2_exact_solutions() -> Crit {
    let grid = req!(GridSpec::two_pi(32), "grid");

    // Forced single mode from rest: w_hat(t) = w_s (1 - e^{-lambda t}).
    let params = req!(PhysParams::new(0.01, 0.1), "params");
    let forcing = ForcingSpec::single((2, 1), 1.0);
    let mut stepper = req!(TimeStepper::new(grid, params, &forcing), "stepper");
    let mut state = State { t: 0.0, omega: SpectralField::zeros(grid) };
    for _ in 0..1000 {
        req!(stepper.step(&mut state, 0.01), "forced step");
    }
    let lambda = 0.01 * 5.0 + 0.1;
    let growth = (1.0 - (-lambda * state.t).exp()) / lambda;
    let fhat = req!(build_forcing(&forcing, grid), "forcing field");
    let mut expected = SpectralField::zeros(grid);
    let c = fhat.coeff(2, 1);
    expected.set_mode_pair(2, 1, Complex64::new(c.re * growth, c.im * growth));
    let forced_err = rel_l2_diff(&state.omega, &expected);
    if forced_err > 1e-9 {
        return (false, format!("forced single mode off by {forced_err:.3e} > 1e-9"));
    }

    // cos x1 + cos x2 is a steady Euler flow; nu = mu = 0, F = 0.
    let inviscid = req!(PhysParams::new(0.0, 0.0), "inviscid params");
    let mut euler = req!(
        TimeStepper::new(grid, inviscid, &ForcingSpec::default()),
        "euler stepper"
    );
    let mut w0 = SpectralField::zeros(grid);
    w0.set_mode_pair(1, 0, Complex64::new(0.5, 0.0));
    w0.set_mode_pair(0, 1, Complex64::new(0.5, 0.0));
    let mut st = State { t: 0.0, omega: w0.clone() };
    for _ in 0..1000 {
        req!(euler.step(&mut st, 0.01), "euler step");
    }
    let euler_drift = rel_l2_diff(&st.omega, &w0);
    if euler_drift > 1e-12 {
        return (false, format!("steady Euler drift {euler_drift:.3e} > 1e-12"));
    }

    // Self-convergence of the RK3 stage against a dt/8 reference.
    let turb = req!(PhysParams::new(5e-3, 0.1), "convergence params");
    let two_modes = ForcingSpec {
        modes: vec![
            ForcingMode { k: (1, 1), amplitude: 1.0, phase: 0.0 },
            ForcingMode { k: (2, -1), amplitude: 0.7, phase: 0.0 },
        ],
    };
    let w_init = req!(
        build_initial(&Initial::Random { seed: 3, slope: -2.0 }, grid),
        "convergence seed"
    );
    let evolve = |steps: usize, h: f64| -> Result<SpectralField, String> {
        let mut ts = TimeStepper::new(grid, turb, &two_modes).map_err(|e| e.to_string())?;
        let mut s = State { t: 0.0, omega: w_init.clone() };
        for _ in 0..steps {
            ts.step(&mut s, h).map_err(|e| e.to_string())?;
        }
        Ok(s.omega)
    };
    let w_h = req!(evolve(64, 1.0 / 64.0), "coarse run");
    let w_h2 = req!(evolve(128, 1.0 / 128.0), "half-step run");
    let w_ref = req!(evolve(512, 1.0 / 512.0), "reference run");
    let e1 = rel_l2_diff(&w_h, &w_ref);
    let e2 = rel_l2_diff(&w_h2, &w_ref);
    let order = (e1 / e2).log2();
    if !(order >= 2.7) {
        return (
            false,
            format!("convergence order {order:.3} < 2.7 (errors {e1:.3e}, {e2:.3e})"),
        );
    }

    (
        true,
        format!(
            "forced mode {forced_err:.1e}, Euler drift {euler_drift:.1e}, order {order:.2}"
        ),
    )
}

/// The long chaotic run; shared with criterion 6.
struct Chaotic {
    cfg: SimConfig,
    result: RunResult,
    forcing: SpectralField,
}

// criterion 3: damping bounds hold along a genuinely chaotic trajectory.
fn c3_chaotic_trajectory() -> (Crit, Option<Chaotic>) {
    let fail = |msg: String| ((false, msg), None);

    let grid = match GridSpec::two_pi(256) {
        Ok(g) => g,
        Err(e) => return fail(format!("grid failed: {e}")),
    };
    let params = match PhysParams::new(5e-3, 0.1) {
        Ok(p) => p,
        Err(e) => return fail(format!("params failed: {e}")),
    };
    let spec = ForcingSpec {
        modes: vec![
            ForcingMode { k: (2, 1), amplitude: 1.0, phase: 0.0 },
            ForcingMode { k: (0, 3), amplitude: 0.5, phase: 0.0 },
        ],
    };
    let mut cfg = SimConfig::new(grid, params, spec.clone(), 200.0);
    cfg.initial = Initial::Random { seed: 7, slope: -2.0 };

    let started = Instant::now();
    let result = match run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(format!("run failed: {e}")),
    };
    let wall = started.elapsed().as_secs_f64();

    let forcing = match build_forcing(&spec, grid) {
        Ok(f) => f,
        Err(e) => return fail(format!("forcing failed: {e}")),
    };
    let mut norms = NormOps::new(grid);
    let f_l4 = match norms.lp(&forcing, 4) {
        Ok(v) => v,
        Err(e) => return fail(format!("forcing L4 failed: {e}")),
    };
    let f_l8 = match norms.lp(&forcing, 8) {
        Ok(v) => v,
        Err(e) => return fail(format!("forcing L8 failed: {e}")),
    };
    let kinds = [
        (LpKind::L2, norms.l2(&forcing)),
        (LpKind::L4, f_l4),
        (LpKind::L8, f_l8),
        (LpKind::LInf, norms.linf(&forcing)),
    ];
    let mut flagged = 0usize;
    let mut worst = f64::INFINITY;
    for (kind, f_norm) in kinds {
        for m in check_vorticity_bound(&result.records, f_norm, params.mu, kind) {
            worst = worst.min(m.margin / (f_norm / params.mu));
            if m.flagged {
                flagged += 1;
            }
        }
    }

    let f_inf = kinds[3].1;
    let linf_cap = f_inf / params.mu * 1.001;
    let linf_max = result
        .records
        .iter()
        .filter(|r| r.t >= cfg.spinup)
        .map(|r| r.linf)
        .fold(0.0f64, f64::max);

    // The pinned grid is marginal for radius work at this D; that is a
    // documented property of the configuration, not a bound violation,
    // so resolution is reported but not asserted here.
    let samples = result.records.len();
    let ok = flagged == 0 && linf_max <= linf_cap && wall <= 600.0;
    let detail = format!(
        "margins clean over {samples} samples x 4 norms (worst {worst:.1e}, flagged {flagged}), \
         post-spinup sup {linf_max:.2} <= {linf_cap:.2}, resolved {}, {wall:.0} s",
        !result.under_resolved
    );
    ((ok, detail), Some(Chaotic { cfg, result, forcing }))
}

// criterion 4: radius estimator accepts clean exponentials at 1% and
// rejects a power-law tail.
fn c4_radius_fits() -> Crit {
    let opts = RadiusFitOptions::default();
    let mut worst_rel = 0.0f64;
    let mut worst_r2 = 1.0f64;
    for (rate, top) in [(1.0, 35usize), (0.3, 110), (0.1, 310)] {
        let spectrum: Vec<f64> = (0..=top).map(|k| (-rate * k as f64).exp()).collect();
        let est = estimate_radius(&spectrum, &opts);
        if !est.accepted {
            return (false, format!("clean exponential rate {rate} rejected"));
        }
        let err = rel(est.l_a, rate);
        if err > 1e-2 || est.r2 < 0.9999 {
            return (
                false,
                format!("rate {rate}: l_a {:.6} (err {err:.2e}), r2 {:.6}", est.l_a, est.r2),
            );
        }
        worst_rel = worst_rel.max(err);
        worst_r2 = worst_r2.min(est.r2);
    }

    let mut power_law = vec![1.0];
    power_law.extend((1..=60).map(|k| (k as f64).powi(-4)));
    let est = estimate_radius(&power_law, &opts);
    if est.accepted {
        return (false, format!("power-law tail accepted with r2 {:.4}", est.r2));
    }

    (
        true,
        format!("exponential rates within {worst_rel:.1e} (r2 >= {worst_r2:.6}), power law rejected"),
    )
}

// criterion 5: viscosity sweep through the CLI; scaling of the measured
// radius against D and the closed-form comparison.
fn c5_sweep_scaling() -> Crit {
    let dir = req!(tempfile::tempdir(), "tempdir");
    let cfg = write_cfg(
        dir.path(),
        "sweep.cfg",
        "grid.n = 256\n\
         params.nu = 1e-2\n\
         params.mu = 0.1\n\
         forcing.modes = (2,1):1.0\n\
         t_end = 30\n\
         spinup = 20\n\
         sample_every = 200\n\
         initial = random\n\
         initial.seed = 11\n\
         sweep.nu_values = 2e-2, 1e-2, 5e-3, 2.5e-3\n\
         sweep.n_values = 256, 512, 512, 512\n",
    );
    let out_dir = dir.path().join("out");

    let started = Instant::now();
    let out = run_cli(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    let wall = started.elapsed().as_secs_f64();
    if !out.status.success() {
        return (
            false,
            format!(
                "sweep exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr).trim()
            ),
        );
    }

    let summary: serde_json::Value = req!(
        serde_json::from_slice(&req!(
            std::fs::read(out_dir.join("summary.json")),
            "summary read"
        )),
        "summary parse"
    );

    let rows = match summary["rows"].as_array() {
        Some(r) => r,
        None => return (false, "summary has no rows".to_string()),
    };
    let mut usable: Vec<(f64, f64)> = Vec::new();
    let mut resolved_count = 0usize;
    for row in rows {
        let resolved = row["resolved"].as_bool().unwrap_or(false);
        if resolved {
            resolved_count += 1;
            if let (Some(d), Some(la)) = (row["D"].as_f64(), row["measured_la"].as_f64()) {
                usable.push((d, la));
            }
        }
    }
    if usable.len() < 2 {
        return (
            false,
            format!("{resolved_count} resolved rows of {}, too few measurements", rows.len()),
        );
    }
    let decreasing = usable.windows(2).all(|w| w[1].1 < w[0].1);

    let exponent = summary["fitted_exponent"].as_f64();
    let exponent_ok = exponent.map(|e| (-0.8..=-0.25).contains(&e)).unwrap_or(false);

    let spread = summary["comparison"]["compensated_spread"].as_f64();
    let spread_ok = !summary["comparison"]["spread_flagged"].as_bool().unwrap_or(true);

    let violation = summary["comparison"]["bound_violation_factor"].as_f64();
    let finding_logged = summary["findings"]
        .as_array()
        .map(|f| {
            f.iter().any(|v| {
                v.as_str().is_some_and(|s| s.contains("calibrate the absolute constant"))
            })
        })
        .unwrap_or(false);

    let ok = decreasing && exponent_ok && spread_ok && violation.is_some() && finding_logged
        && wall <= 1800.0;
    (
        ok,
        format!(
            "{resolved_count}/{} rows resolved, la decreasing {decreasing}, exponent {:?}, \
             spread {:?}, violation factor {:?} (finding {finding_logged}), {wall:.0} s",
            rows.len(),
            exponent,
            spread,
            violation,
        ),
    )
}

// criterion 6: determining modes synchronize at a kappa far below the
// predicted mode budget. Reuses the criterion 3 end state as master.
fn c6_determining_modes(fixture: Option<&Chaotic>) -> Crit {
    let Some(fx) = fixture else {
        return (false, "chaotic fixture unavailable (criterion 3 crashed)".to_string());
    };
    let dims = req!(
        dimensionless(fx.cfg.params, &fx.forcing, fx.cfg.sigma1),
        "dimensionless numbers"
    );
    let n_pred = determining_mode_prediction(&dims);
    let cap_12d = 12.0 * dims.damped;

    let started = Instant::now();
    let mut probes: Vec<SyncResult> = Vec::new();
    let probe = |k: usize| determining_modes_from(&fx.result.final_state, &fx.cfg, k);

    let first = req!(probe(32), "kappa 32 trial");
    let first_synced = first.synchronized;
    probes.push(first);
    if first_synced {
        // Walk downward while the budget allows; tighter minima are
        // informative but optional.
        if started.elapsed().as_secs_f64() < 480.0 {
            let r16 = req!(probe(16), "kappa 16 trial");
            let synced16 = r16.synchronized;
            probes.push(r16);
            if synced16 && started.elapsed().as_secs_f64() < 720.0 {
                probes.push(req!(probe(8), "kappa 8 trial"));
            }
        }
    } else {
        probes.push(req!(probe(64), "kappa 64 trial"));
    }
    let wall = started.elapsed().as_secs_f64();

    let synced: Vec<&SyncResult> = probes.iter().filter(|r| r.synchronized).collect();
    let Some(minimal) = synced.iter().map(|r| r.kappa_c).min() else {
        let tried: Vec<usize> = probes.iter().map(|r| r.kappa_c).collect();
        return (false, format!("no probed kappa in {tried:?} synchronized within the horizon"));
    };
    let minimal_n_det = count_modes_within(minimal) as f64;
    let within_12d = synced
        .iter()
        .any(|r| (count_modes_within(r.kappa_c) as f64) <= cap_12d);

    // Monotonicity in kappa is expected, not enforced: a wider disc that
    // fails after a narrower one succeeded is a finding.
    let mut by_kappa: Vec<&SyncResult> = probes.iter().collect();
    by_kappa.sort_by_key(|r| r.kappa_c);
    let mut monotonicity_note = String::new();
    for i in 0..by_kappa.len() {
        for j in (i + 1)..by_kappa.len() {
            if by_kappa[i].synchronized && !by_kappa[j].synchronized {
                monotonicity_note = format!(
                    "; finding: kappa {} synced but wider kappa {} did not",
                    by_kappa[i].kappa_c, by_kappa[j].kappa_c
                );
            }
        }
    }

    let ladder: Vec<String> = probes
        .iter()
        .map(|r| format!("{}{}", r.kappa_c, if r.synchronized { "+" } else { "-" }))
        .collect();
    let ok = within_12d && minimal_n_det <= n_pred && wall <= 1200.0;
    (
        ok,
        format!(
            "ladder [{}], minimal N_det {minimal_n_det:.0} <= N_pred {n_pred:.0} (12D cap {cap_12d:.2e}), \
             D {:.3e}, {wall:.0} s{monotonicity_note}",
            ladder.join(", "),
            dims.damped,
        ),
    )
}

// criterion 7: every quoted numeric example re-derived independently,
// plus the structural invariants of the closed forms.
fn c7_closed_forms() -> Crit {
    let area = 4.0 * core::f64::consts::PI * core::f64::consts::PI;
    let k = Constants::default();
    let mut worst = 0.0f64;
    let mut track = |name: &str, got: f64, want: f64, tol: f64| -> Result<(), String> {
        let err = rel(got, want);
        if err > tol {
            return Err(format!("{name}: got {got:.9e}, derived {want:.9e}, err {err:.1e}"));
        }
        worst = worst.max(err);
        Ok(())
    };

    // Single-mode forcing cos(2 x1 + x2), nu = 1e-2, mu = 0.1.
    let grid = req!(GridSpec::two_pi(64), "grid");
    let forcing = req!(build_forcing(&ForcingSpec::single((2, 1), 1.0), grid), "forcing");
    let params = req!(PhysParams::new(0.01, 0.1), "params");
    let dims = req!(dimensionless(params, &forcing, 0.5), "dimensionless");

    // G = ||f||_2 |O| / nu^2 with f the velocity-level forcing, so the
    // vorticity amplitude is divided by |k| = sqrt 5.
    let f_l2 = (area / 2.0).sqrt() / 5.0f64.sqrt();
    let g_indep = f_l2 * area / (0.01 * 0.01);
    if let Err(e) = track("G", dims.grashof, g_indep, 1e-9) {
        return (false, e);
    }
    if rel(dims.grashof, 7.844e5) > 1e-3 {
        return (false, format!("G anchor drifted: {:.4e} vs 7.844e5", dims.grashof));
    }

    let d_indep = area / (0.1 * 0.01);
    if let Err(e) = track("D", dims.damped, d_indep, 1e-9) {
        return (false, e);
    }

    let db = damped_bounds(&dims, area, 0.5, &k);
    let l_dn_indep = 68f64.powf(0.25) * (area / d_indep).sqrt();
    if let Err(e) = track("l_dn", db.l_dn, l_dn_indep, 1e-9) {
        return (false, e);
    }
    if rel(db.l_dn, 0.0908) > 2e-3 {
        return (false, format!("l_dn anchor drifted: {:.4e}", db.l_dn));
    }

    let la_lp_indep = area.sqrt() / (d_indep.sqrt() * (1.0 + d_indep.ln()).sqrt());
    if let Err(e) = track("la_damped_lp", db.la_lp, la_lp_indep, 1e-9) {
        return (false, e);
    }
    if rel(db.la_lp, 9.31e-3) > 3e-3 {
        return (false, format!("la_damped_lp anchor drifted: {:.4e}", db.la_lp));
    }

    // Classical Gevrey route at G = 1e4.
    let synth = Dimensionless { grashof: 1e4, damped: 1.0, forcing_gevrey: 0.0 };
    let cb = classical_bounds(&synth, area, &k);
    let gev_indep = area.sqrt() / (1e8 * 1e4f64.ln());
    if let Err(e) = track("classical la_gevrey", cb.la_gevrey, gev_indep, 1e-9) {
        return (false, e);
    }
    if rel(cb.la_gevrey, 6.82e-9) > 2e-3 {
        return (false, format!("la_gevrey anchor drifted: {:.4e}", cb.la_gevrey));
    }

    // Strip sup of the complexified forcing at delta_F = 1/2.
    let strip = req!(forcing_strip_bound(&ForcingSpec::single((2, 1), 1.0), 0.5), "strip");
    let m_f_indep = (5f64.sqrt() * 0.5).cosh();
    if let Err(e) = track("M_F", strip.m_f, m_f_indep, 1e-12) {
        return (false, e);
    }
    if !strip.exact || rel(strip.m_f, 1.692879) > 1e-5 {
        return (false, format!("M_F anchor drifted: {:.7}", strip.m_f));
    }

    // Guaranteed strip radius at t = 0.01, p = 2, M_4 = 10, delta_F = 1.
    let delta = req!(strip_radius_at(0.01, 2.0, 10.0, 1.0, 1.0), "strip radius");
    let t: f64 = 0.01;
    let candidates = [
        t.sqrt(),
        1.0 / (2.0 * t.powf(0.125) * 10.0),
        1.0 / (2.0 * t.powf(1.0 / 14.0) * 10f64.powf(4.0 / 7.0)),
        1.0 / (2.0 * t.sqrt() * 10.0),
        1.0,
    ];
    let delta_indep = candidates.iter().cloned().fold(f64::INFINITY, f64::min);
    if let Err(e) = track("strip radius", delta, delta_indep, 1e-12) {
        return (false, e);
    }
    if rel(delta, 0.0889) > 2e-3 || rel(delta_indep, candidates[1]) > 1e-15 {
        return (false, format!("strip radius anchor drifted: {:.5}", delta));
    }

    // Single Gronwall term K=1, alpha=0, beta=1, gamma=0 at M = N = 1.
    let g1 = req!(
        gronwall_time(
            &[GronwallTerm { k: 1.0, alpha: 0.0, beta: 1.0, gamma: 0.0 }],
            1.0,
            1.0,
            f64::INFINITY,
        ),
        "gronwall"
    );
    if (g1 - 0.5).abs() > 1e-15 {
        return (false, format!("single-term Gronwall time {g1} != 0.5"));
    }

    // Invariant: la_damped_lp sqrt(D (1 + ln D)) is exactly sqrt(|O|)/C.
    for e in 2..=12 {
        let d = 10f64.powi(e);
        let dd = Dimensionless { grashof: 1.0, damped: d, forcing_gevrey: 0.0 };
        let b = damped_bounds(&dd, area, 1e300, &k);
        let comp = b.la_lp * (d * (1.0 + d.ln())).sqrt() / area.sqrt();
        if (comp - 1.0).abs() > 1e-12 {
            return (false, format!("compensated radius drifts at D=1e{e}: {comp:.15}"));
        }
        if e <= 8 && !(b.la_lp >= b.la_gevrey) {
            return (
                false,
                format!("route ordering broken at D=1e{e}: lp {} < gevrey {}", b.la_lp, b.la_gevrey),
            );
        }
    }

    // Invariant: gronwall_time equals a brute-force minimum.
    let terms = [
        GronwallTerm { k: 2.0, alpha: 1.0, beta: 0.5, gamma: 0.25 },
        GronwallTerm { k: 0.3, alpha: 0.5, beta: 2.0, gamma: 0.0 },
        GronwallTerm { k: 5.0, alpha: 2.0, beta: -1.0, gamma: 1.0 },
    ];
    let (m, nf, cap) = (1.7f64, 2.2f64, 100.0f64);
    let lib = req!(gronwall_time(&terms, m, nf, cap), "gronwall set");
    let brute = terms
        .iter()
        .map(|t| {
            let denom = nf
                * t.k
                * 2f64.powf(t.beta.max(0.0) + t.gamma)
                * m.powf(t.beta + t.gamma - 1.0);
            ((t.alpha + 1.0) / denom).powf(1.0 / (t.alpha + 1.0))
        })
        .fold(cap, f64::min);
    if let Err(e) = track("gronwall brute force", lib, brute, 1e-12) {
        return (false, e);
    }

    // Invariant: prediction is D / sqrt 68; reports are pure functions.
    if let Err(e) = track(
        "mode prediction",
        determining_mode_prediction(&dims),
        d_indep / 68f64.sqrt(),
        1e-12,
    ) {
        return (false, e);
    }
    let r1 = req!(full_report(params, &forcing, 0.5, &k), "report");
    let r2 = req!(full_report(params, &forcing, 0.5, &k), "report repeat");
    if r1 != r2 {
        return (false, "full_report is not deterministic".to_string());
    }

    (true, format!("7 examples re-derived (worst rel err {worst:.1e}), invariants hold"))
}

// criterion 8: identical bytes across reruns and across job counts.
fn c8_byte_determinism() -> Crit {
    let dir = req!(tempfile::tempdir(), "tempdir");

    let sim_cfg = write_cfg(
        dir.path(),
        "sim.cfg",
        "grid.n = 32\nparams.nu = 0.05\nparams.mu = 0.2\n\
         forcing.modes = (2,1):1.0 + (1,2):0.5\n\
         t_end = 2\nspinup = 1\nsample_every = 5\ninitial = random\ninitial.seed = 7\n",
    );
    for name in ["sim_a", "sim_b"] {
        let out = run_cli(&[
            "simulate",
            "--config",
            sim_cfg.to_str().unwrap(),
            "--out",
            dir.path().join(name).to_str().unwrap(),
        ]);
        if !out.status.success() {
            return (false, format!("simulate rerun exited {:?}", out.status.code()));
        }
    }
    let a = req!(std::fs::read(dir.path().join("sim_a/diagnostics.csv")), "csv a");
    let b = req!(std::fs::read(dir.path().join("sim_b/diagnostics.csv")), "csv b");
    if a != b {
        return (false, "diagnostics.csv differs between identical reruns".to_string());
    }

    let sweep_cfg = write_cfg(
        dir.path(),
        "sweep.cfg",
        "grid.n = 16\nparams.nu = 0.5\nparams.mu = 0.5\n\
         forcing.modes = (1,0):0.02 + (1,1):0.02\n\
         t_end = 6\ndt = 0.05\nspinup = 3\nsample_every = 20\n\
         sweep.nu_values = 0.5, 0.35, 0.25\nsweep.n_values = 16, 16, 16\n",
    );
    for (name, jobs) in [("jobs1", "1"), ("jobs4", "4")] {
        let out = run_cli(&[
            "sweep",
            "--config",
            sweep_cfg.to_str().unwrap(),
            "--out",
            dir.path().join(name).to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        if !out.status.success() {
            return (false, format!("sweep --jobs {jobs} exited {:?}", out.status.code()));
        }
    }
    let mut compared = 1usize;
    for relpath in [
        "summary.json",
        "row_00/diagnostics.csv",
        "row_01/diagnostics.csv",
        "row_02/diagnostics.csv",
    ] {
        let x = req!(std::fs::read(dir.path().join("jobs1").join(relpath)), "jobs1 artifact");
        let y = req!(std::fs::read(dir.path().join("jobs4").join(relpath)), "jobs4 artifact");
        if x != y {
            return (false, format!("{relpath} differs between --jobs 1 and --jobs 4"));
        }
        compared += 1;
    }

    (true, format!("{compared} artifacts byte-identical across reruns and job counts"))
}

#[test]
fn acceptance_criteria() {
    let mut failures: Vec<String> = Vec::new();
    let mut verdict = |n: usize, (ok, detail): Crit| {
        let line = format!("[{}] criterion {n}: {detail}", if ok { "PASS" } else { "FAIL" });
        report(&line);
        if !ok {
            failures.push(line);
        }
    };

    verdict(1, guarded(c1_spectral_identities));
    verdict(2, guarded(c2_exact_solutions));

    let mut fixture: Option<Chaotic> = None;
    let c3 = match catch_unwind(AssertUnwindSafe(c3_chaotic_trajectory)) {
        Ok((crit, fx)) => {
            fixture = fx;
            crit
        }
        Err(_) => (false, "panicked".to_string()),
    };
    verdict(3, c3);

    verdict(4, guarded(c4_radius_fits));
    verdict(5, guarded(c5_sweep_scaling));
    verdict(6, guarded(|| c6_determining_modes(fixture.as_ref())));
    verdict(7, guarded(c7_closed_forms));
    verdict(8, guarded(c8_byte_determinism));

    assert!(
        failures.is_empty(),
        "{} of 8 acceptance criteria failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
