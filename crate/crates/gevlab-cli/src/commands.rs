//! Subcommand implementations. Each takes already-parsed CLI arguments,
//! does its filesystem work through `Manifest`, and reports problems as
//! `Failure` values for `main` to encode.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use gevlab_core::bounds::{determining_mode_prediction, dimensionless, full_report};
use gevlab_core::checkpoint;
use gevlab_core::diagnostics::{
    check_vorticity_bound, estimate_radius, DiagnosticsRecord, LpKind, RadiusFitOptions,
};
use gevlab_core::experiments::{
    collect_sweep, compare_bounds, explicit_plan, run_sweep, run_sweep_row, scan_determining,
    spinup_master, ExperimentError, SweepConfig, SweepOutput, SweepRow,
};
use gevlab_core::norm::NormOps;
use gevlab_core::solver::{
    build_forcing, run_with_observer, PhysParams, RunError, RunObserver, State,
};
use gevlab_core::SpectralField;

use crate::config::{parse_config, ParsedConfig, SimBundle, SweepBundle};
use crate::fail::Failure;
use crate::output::{diagnostics_csv, spectrum_from_csv, sync_series_csv, to_pretty_json, Manifest};

fn read_config(path: &Path, seed: Option<u64>) -> Result<ParsedConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    parse_config(&text, seed)
}

fn sim_only(parsed: ParsedConfig) -> Result<SimBundle, Failure> {
    match parsed {
        ParsedConfig::Sim(bundle) => Ok(bundle),
        ParsedConfig::Sweep(_) => Err(Failure::Config(
            "config contains sweep.* keys; use the sweep subcommand".to_string(),
        )),
    }
}

fn sweep_only(parsed: ParsedConfig) -> Result<SweepBundle, Failure> {
    match parsed {
        ParsedConfig::Sweep(bundle) => Ok(bundle),
        ParsedConfig::Sim(_) => Err(Failure::Config(
            "config has no sweep.* keys; at least sweep.nu_values is required".to_string(),
        )),
    }
}

fn experiment_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::Run(RunError::BlowUp(b)) => {
            Failure::BlowUp(format!("solution left f64 range at t = {}", b.t))
        }
        ExperimentError::StepFailed { t } => {
            Failure::BlowUp(format!("solution left f64 range at t = {t}"))
        }
        ExperimentError::AllUnresolved(_) => Failure::Unresolved(e.to_string()),
        other => Failure::Config(other.to_string()),
    }
}

/// Streams checkpoints to the output directory as the run produces
/// them; the first write error is kept and re-raised after the run.
struct CheckpointWriter<'a> {
    manifest: &'a mut Manifest,
    params: PhysParams,
    error: Option<Failure>,
}

impl RunObserver for CheckpointWriter<'_> {
    fn on_checkpoint(&mut self, step: usize, state: &State) {
        if self.error.is_some() {
            return;
        }
        let bytes = checkpoint::encode(state, self.params);
        let rel = format!("checkpoint_{step:08}.gvns");
        if let Err(e) = self.manifest.write(&rel, &bytes) {
            self.error = Some(e);
        }
    }
}

/// Closed-form bound report as a JSON value, degrading to null (plus an
/// explanatory finding) when the numbers are undefined, e.g. for zero
/// forcing. A finished run should not be discarded over its sidecar.
fn bounds_value(
    bundle: &SimBundle,
    forcing: &SpectralField,
    findings: &mut Vec<String>,
) -> serde_json::Value {
    match full_report(bundle.cfg.params, forcing, bundle.cfg.sigma1, &bundle.constants) {
        Ok(report) => serde_json::to_value(&report).expect("report is plain data"),
        Err(e) => {
            findings.push(format!("bounds unavailable: {e}"));
            serde_json::Value::Null
        }
    }
}

/// Per-norm damping-bound margins, reduced to the worst sample.
fn margin_values(
    records: &[DiagnosticsRecord],
    forcing: &SpectralField,
    mu: f64,
    findings: &mut Vec<String>,
) -> Result<Vec<serde_json::Value>, Failure> {
    let mut norms = NormOps::new(forcing.grid());
    let l4 = norms.lp(forcing, 4).map_err(|e| Failure::Config(e.to_string()))?;
    let l8 = norms.lp(forcing, 8).map_err(|e| Failure::Config(e.to_string()))?;
    let table = [
        ("l2", norms.l2(forcing), LpKind::L2),
        ("l4", l4, LpKind::L4),
        ("l8", l8, LpKind::L8),
        ("linf", norms.linf(forcing), LpKind::LInf),
    ];
    let mut out = Vec::with_capacity(table.len());
    for (name, forcing_lp, kind) in table {
        let margins = check_vorticity_bound(records, forcing_lp, mu, kind);
        let min_margin = margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
        let flagged = margins.iter().filter(|m| m.flagged).count();
        if flagged > 0 {
            findings.push(format!(
                "damping bound on the {name} norm breached at {flagged} of {} samples",
                margins.len()
            ));
        }
        out.push(serde_json::json!({
            "norm": name,
            "forcing_norm": forcing_lp,
            "min_margin": if margins.is_empty() { serde_json::Value::Null } else { min_margin.into() },
            "flagged_samples": flagged,
        }));
    }
    Ok(out)
}

pub fn simulate(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let bundle = sim_only(read_config(config_path, seed)?)?;
    let cfg = &bundle.cfg;
    let mut manifest = Manifest::new(out_dir, config_path, bundle.resolved.clone())?;

    let outcome = {
        let mut observer =
            CheckpointWriter { manifest: &mut manifest, params: cfg.params, error: None };
        let outcome = run_with_observer(cfg, &mut observer);
        if let Some(e) = observer.error {
            return Err(e);
        }
        outcome
    };

    let result = match outcome {
        Ok(result) => result,
        Err(RunError::Invalid(e)) => return Err(Failure::Config(e.to_string())),
        Err(RunError::BlowUp(b)) => {
            // flush what we have so the failure can be diagnosed offline
            manifest.write("diagnostics.csv", diagnostics_csv(&b.records).as_bytes())?;
            manifest.finish()?;
            return Err(Failure::BlowUp(format!("solution left f64 range at t = {}", b.t)));
        }
    };

    manifest.write("diagnostics.csv", diagnostics_csv(&result.records).as_bytes())?;
    manifest.write("final.gvns", &checkpoint::encode(&result.final_state, cfg.params))?;

    let mut findings = Vec::new();
    if result.under_resolved {
        findings.push(
            "spectral tail breached the resolution threshold after spinup; \
             radius measurements are not trustworthy"
                .to_string(),
        );
    }
    let forcing = build_forcing(&cfg.forcing, cfg.grid).map_err(|e| Failure::Config(e.to_string()))?;
    let bounds = bounds_value(&bundle, &forcing, &mut findings);
    let margins = margin_values(&result.records, &forcing, cfg.params.mu, &mut findings)?;

    let summary = serde_json::json!({
        "t_end": cfg.t_end,
        "samples": result.records.len(),
        "radius_median": result.radius_median,
        "accepted_samples": result.accepted_samples,
        "under_resolved": result.under_resolved,
        "bounds": bounds,
        "damping_margins": margins,
        "findings": findings,
    });
    manifest.write("summary.json", to_pretty_json(&summary).as_bytes())?;
    manifest.finish()
}

/// Worker pool over the explicit row plan. Rows land in plan order no
/// matter which thread ran them, so outputs match a sequential sweep.
fn run_plan_parallel(
    bundle: &SweepBundle,
    plan: &[(f64, usize)],
    jobs: usize,
) -> Result<SweepOutput, ExperimentError> {
    let base = &bundle.sim.cfg;
    let constants = &bundle.sim.constants;
    let slots: Vec<Mutex<Option<Result<_, ExperimentError>>>> =
        plan.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(plan.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= plan.len() {
                    break;
                }
                let (nu, n) = plan[i];
                let outcome = run_sweep_row(base, nu, n, constants);
                *slots[i].lock().expect("no poisoned slots") = Some(outcome);
            });
        }
    });
    let mut rows = Vec::with_capacity(plan.len());
    let mut runs = Vec::with_capacity(plan.len());
    for slot in slots {
        let outcome = slot
            .into_inner()
            .expect("no poisoned slots")
            .expect("every claimed index was filled");
        let (row, run) = outcome?;
        rows.push(row);
        runs.push(run);
    }
    collect_sweep(rows, runs)
}

fn sweep_summary(
    rows: &[SweepRow],
    fitted_exponent: Option<f64>,
    exponent_stderr: Option<f64>,
    comparison: serde_json::Value,
    findings: &[String],
) -> serde_json::Value {
    serde_json::json!({
        "rows": rows,
        "fitted_exponent": fitted_exponent,
        "exponent_stderr": exponent_stderr,
        "comparison": comparison,
        "findings": findings,
    })
}

pub fn sweep(
    config_path: &Path,
    out_dir: &Path,
    jobs: usize,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let bundle = sweep_only(read_config(config_path, seed)?)?;
    let mut manifest = Manifest::new(out_dir, config_path, bundle.sim.resolved.clone())?;

    let sweep_cfg = SweepConfig {
        base: bundle.sim.cfg.clone(),
        nu_values: bundle.nu_values.clone(),
        n_values: bundle.n_values.clone(),
    };
    // adaptive grid refinement carries state between rows, so it cannot fan out
    let plan = explicit_plan(&sweep_cfg).map_err(experiment_failure)?;
    let outcome = match plan {
        Some(plan) if jobs > 1 => run_plan_parallel(&bundle, &plan, jobs),
        _ => run_sweep(&sweep_cfg, &bundle.sim.constants),
    };

    let output = match outcome {
        Ok(output) => output,
        Err(ExperimentError::AllUnresolved(rows)) => {
            let findings = vec![
                "every row breached the resolution threshold; no scaling fit is possible"
                    .to_string(),
            ];
            let summary = sweep_summary(&rows, None, None, serde_json::Value::Null, &findings);
            manifest.write("summary.json", to_pretty_json(&summary).as_bytes())?;
            manifest.finish()?;
            return Err(experiment_failure(ExperimentError::AllUnresolved(rows)));
        }
        Err(e) => return Err(experiment_failure(e)),
    };

    for (i, run) in output.runs.iter().enumerate() {
        let rel = format!("row_{i:02}/diagnostics.csv");
        manifest.write(&rel, diagnostics_csv(&run.records).as_bytes())?;
    }

    let mut findings = Vec::new();
    for row in &output.result.rows {
        if !row.resolved {
            findings.push(format!(
                "row nu = {} stayed under-resolved at n = {}; excluded from the fit",
                row.nu, row.n
            ));
        }
    }
    let comparison = match compare_bounds(&output.result, bundle.spread_factor) {
        Ok(cmp) => {
            findings.push(format!(
                "largest lp-route lower bound over measured radius at default constants: {:.4}; \
                 values above 1 calibrate the absolute constant, not the scaling",
                cmp.bound_violation_factor
            ));
            if cmp.spread_flagged {
                findings.push(format!(
                    "compensated product spread {:.3} exceeds the factor {} expected from the \
                     lp-route law",
                    cmp.compensated_spread, bundle.spread_factor
                ));
            }
            serde_json::to_value(&cmp).expect("comparison is plain data")
        }
        Err(e) => {
            findings.push(format!("bound comparison unavailable: {e}"));
            serde_json::Value::Null
        }
    };

    let summary = sweep_summary(
        &output.result.rows,
        output.result.fitted_exponent,
        output.result.exponent_stderr,
        comparison,
        &findings,
    );
    manifest.write("summary.json", to_pretty_json(&summary).as_bytes())?;
    manifest.finish()
}

pub fn bounds(config_path: &Path, out_dir: Option<&Path>) -> Result<(), Failure> {
    let bundle = match read_config(config_path, None)? {
        ParsedConfig::Sim(b) => b,
        ParsedConfig::Sweep(b) => b.sim,
    };
    let cfg = &bundle.cfg;
    let forcing = build_forcing(&cfg.forcing, cfg.grid).map_err(|e| Failure::Config(e.to_string()))?;
    let report = full_report(cfg.params, &forcing, cfg.sigma1, &bundle.constants)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let text = to_pretty_json(&report);
    print!("{text}");
    if let Some(dir) = out_dir {
        let mut manifest = Manifest::new(dir, config_path, bundle.resolved.clone())?;
        manifest.write("bounds.json", text.as_bytes())?;
        manifest.finish()?;
    }
    Ok(())
}

pub fn sync(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let bundle = sim_only(read_config(config_path, seed)?)?;
    let cfg = &bundle.cfg;
    if bundle.kappas.is_empty() {
        return Err(Failure::Config(
            "sync.kappa_c is required for the sync subcommand".to_string(),
        ));
    }
    let mut manifest = Manifest::new(out_dir, config_path, bundle.resolved.clone())?;

    let master0 = spinup_master(cfg).map_err(experiment_failure)?;
    let scan = scan_determining(&master0, cfg, &bundle.kappas).map_err(experiment_failure)?;

    for result in &scan.results {
        let rel = format!("sync_series_k{:03}.csv", result.kappa_c);
        manifest.write(&rel, sync_series_csv(&result.series).as_bytes())?;
    }

    let mut findings = Vec::new();
    // a wider observed disc failing where a narrower one synchronized is
    // worth surfacing, but with a finite horizon it is not an error
    let mut sorted: Vec<_> = scan.results.iter().collect();
    sorted.sort_by_key(|r| r.kappa_c);
    for pair in sorted.windows(2) {
        if pair[0].synchronized && !pair[1].synchronized {
            findings.push(format!(
                "kappa_c = {} synchronized but the wider kappa_c = {} did not within the horizon",
                pair[0].kappa_c, pair[1].kappa_c
            ));
        }
    }

    let forcing = build_forcing(&cfg.forcing, cfg.grid).map_err(|e| Failure::Config(e.to_string()))?;
    let prediction = match dimensionless(cfg.params, &forcing, cfg.sigma1) {
        Ok(numbers) => serde_json::json!({
            "D": numbers.damped,
            "n_det_predicted": determining_mode_prediction(&numbers),
        }),
        Err(e) => {
            findings.push(format!("determining-mode prediction unavailable: {e}"));
            serde_json::Value::Null
        }
    };

    let summary = serde_json::json!({
        "results": scan.results,
        "minimal_kappa": scan.minimal_kappa,
        "prediction": prediction,
        "findings": findings,
    });
    manifest.write("summary.json", to_pretty_json(&summary).as_bytes())?;
    manifest.finish()
}

pub fn radius(spectrum_path: &Path, out_dir: Option<&Path>) -> Result<(), Failure> {
    let text = fs::read_to_string(spectrum_path).map_err(|e| Failure::io(spectrum_path, e))?;
    let spectrum = spectrum_from_csv(&text)?;
    let estimate = estimate_radius(&spectrum, &RadiusFitOptions::default());
    let out = to_pretty_json(&estimate);
    print!("{out}");
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        let path = dir.join("radius.json");
        fs::write(&path, out.as_bytes()).map_err(|e| Failure::io(&path, e))?;
    }
    Ok(())
}
