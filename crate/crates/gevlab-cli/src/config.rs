//! Flat dotted-key configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment; blank lines
//! are ignored. Keys are dotted to group sections without a schema
//! engine. Unknown keys are rejected with their line number so typos
//! cannot silently fall back to defaults.
//!
//! Recognized keys:
//!
//! ```text
//! grid.n                = 256            # points per axis (even, >= 8)
//! grid.length           = 6.2831853      # domain period, default 2*pi
//! params.nu             = 5e-3
//! params.mu             = 0.1
//! forcing.modes         = (2,1):1.0 + (0,3):0.5:1.57   # (k1,k2):amp[:phase], or "none"
//! t_end                 = 200
//! dt                    = auto           # or a positive step size
//! spinup                = 100            # default 10/mu when that fits before t_end
//! sample_every          = 50             # steps between diagnostics samples
//! checkpoint_every      = 5000           # steps between checkpoints, default none
//! sigma1                = 0.5            # Gevrey shift cap
//! initial               = zero | single_mode | random
//! initial.seed          = 7              # random only
//! initial.slope         = -2.0           # random only, spectral envelope power
//! initial.k             = (2,1)          # single_mode only
//! initial.amp           = 1.0            # single_mode only
//! sweep.nu_values       = 2e-2, 1e-2, 5e-3, 2.5e-3
//! sweep.n_values        = 128, 128, 256, 256          # omit for adaptive doubling
//! sweep.spread_factor   = 3.0
//! sync.kappa_c          = 32             # or a comma list to scan
//! constants.c           = 1.0            # likewise c1..c8 and C
//! ```

use std::collections::BTreeMap;

use gevlab_core::bounds::Constants;
use gevlab_core::solver::{
    build_forcing, Dt, ForcingMode, ForcingSpec, Initial, PhysParams, SimConfig,
};
use gevlab_core::GridSpec;

use crate::fail::Failure;

/// A single-run configuration plus the sidecar settings that ride in
/// the same file.
#[derive(Debug, Clone)]
pub struct SimBundle {
    pub cfg: SimConfig,
    pub constants: Constants,
    /// Observation radii for the sync subcommand, empty when absent.
    pub kappas: Vec<usize>,
    /// Every resolved key-value pair, defaults included, for the
    /// manifest echo.
    pub resolved: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct SweepBundle {
    pub sim: SimBundle,
    pub nu_values: Vec<f64>,
    pub n_values: Option<Vec<usize>>,
    pub spread_factor: f64,
}

#[derive(Debug, Clone)]
pub enum ParsedConfig {
    Sim(SimBundle),
    Sweep(SweepBundle),
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, Failure> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::Config(format!("line {line_no}: expected 'key = value', got '{line}'"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Failure::Config(format!("line {line_no}: empty key")));
            }
            if let Some((first_line, _)) = map.get(&key) {
                return Err(Failure::Config(format!(
                    "line {line_no}: duplicate key '{key}' (first set on line {first_line})"
                )));
            }
            map.insert(key, (line_no, value));
        }
        Ok(Entries { map, used: Default::default() })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.map.get(key).map(|(l, _)| *l).unwrap_or(0)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn any_with_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }

    fn require(&self, key: &str) -> Result<&str, Failure> {
        self.get(key)
            .ok_or_else(|| Failure::Config(format!("missing required key '{key}'")))
    }

    fn f64_of(&self, key: &str, raw: &str) -> Result<f64, Failure> {
        raw.parse::<f64>().map_err(|_| {
            Failure::Config(format!(
                "key '{key}' (line {}): '{raw}' is not a number",
                self.line_of(key)
            ))
        })
    }

    fn get_f64(&self, key: &str, default: f64) -> Result<f64, Failure> {
        match self.get(key) {
            Some(raw) => self.f64_of(key, raw),
            None => Ok(default),
        }
    }

    fn require_f64(&self, key: &str) -> Result<f64, Failure> {
        let raw = self.require(key)?;
        self.f64_of(key, raw)
    }

    fn usize_of(&self, key: &str, raw: &str) -> Result<usize, Failure> {
        raw.parse::<usize>().map_err(|_| {
            Failure::Config(format!(
                "key '{key}' (line {}): '{raw}' is not a non-negative integer",
                self.line_of(key)
            ))
        })
    }

    fn get_usize(&self, key: &str, default: usize) -> Result<usize, Failure> {
        match self.get(key) {
            Some(raw) => self.usize_of(key, raw),
            None => Ok(default),
        }
    }

    fn get_u64(&self, key: &str, default: u64) -> Result<u64, Failure> {
        match self.get(key) {
            Some(raw) => raw.parse::<u64>().map_err(|_| {
                Failure::Config(format!(
                    "key '{key}' (line {}): '{raw}' is not an unsigned integer",
                    self.line_of(key)
                ))
            }),
            None => Ok(default),
        }
    }

    /// Every key must have been consulted by the typed extractors.
    fn finish(self) -> Result<(), Failure> {
        let used = self.used.into_inner();
        for (key, (line, _)) in &self.map {
            if !used.contains(key) {
                return Err(Failure::Config(format!("unknown key '{key}' (line {line})")));
            }
        }
        Ok(())
    }
}

fn parse_mode_pair(key: &str, raw: &str, line: usize) -> Result<(i64, i64), Failure> {
    let inner = raw
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| {
            Failure::Config(format!("key '{key}' (line {line}): expected '(k1,k2)', got '{raw}'"))
        })?;
    let (a, b) = inner.split_once(',').ok_or_else(|| {
        Failure::Config(format!("key '{key}' (line {line}): expected '(k1,k2)', got '{raw}'"))
    })?;
    let k1 = a.trim().parse::<i64>();
    let k2 = b.trim().parse::<i64>();
    match (k1, k2) {
        (Ok(k1), Ok(k2)) => Ok((k1, k2)),
        _ => Err(Failure::Config(format!(
            "key '{key}' (line {line}): '{raw}' has non-integer components"
        ))),
    }
}

fn parse_forcing(entries: &Entries) -> Result<ForcingSpec, Failure> {
    let key = "forcing.modes";
    let raw = entries.require(key)?.to_string();
    let line = entries.line_of(key);
    if raw == "none" {
        return Ok(ForcingSpec { modes: Vec::new() });
    }
    let mut modes = Vec::new();
    for part in raw.split('+') {
        let part = part.trim();
        let mut fields = part.split(':');
        let k_str = fields.next().unwrap_or("");
        let k = parse_mode_pair(key, k_str, line)?;
        let amp_str = fields.next().ok_or_else(|| {
            Failure::Config(format!(
                "key '{key}' (line {line}): mode '{part}' is missing ':amplitude'"
            ))
        })?;
        let amplitude = amp_str.trim().parse::<f64>().map_err(|_| {
            Failure::Config(format!(
                "key '{key}' (line {line}): amplitude '{amp_str}' is not a number"
            ))
        })?;
        let phase = match fields.next() {
            Some(p) => p.trim().parse::<f64>().map_err(|_| {
                Failure::Config(format!("key '{key}' (line {line}): phase '{p}' is not a number"))
            })?,
            None => 0.0,
        };
        if fields.next().is_some() {
            return Err(Failure::Config(format!(
                "key '{key}' (line {line}): mode '{part}' has trailing fields"
            )));
        }
        modes.push(ForcingMode { k, amplitude, phase });
    }
    Ok(ForcingSpec { modes })
}

fn parse_initial(entries: &Entries) -> Result<Initial, Failure> {
    match entries.get("initial").unwrap_or("zero") {
        "zero" => Ok(Initial::Zero),
        "random" => {
            let seed = entries.get_u64("initial.seed", 0)?;
            let slope = entries.get_f64("initial.slope", -2.0)?;
            Ok(Initial::Random { seed, slope })
        }
        "single_mode" => {
            let key = "initial.k";
            let raw = entries.require(key)?.to_string();
            let k = parse_mode_pair(key, &raw, entries.line_of(key))?;
            let amp = entries.require_f64("initial.amp")?;
            Ok(Initial::SingleMode { k, amp })
        }
        other => Err(Failure::Config(format!(
            "key 'initial' (line {}): '{other}' is not one of zero | single_mode | random",
            entries.line_of("initial")
        ))),
    }
}

fn parse_f64_list(entries: &Entries, key: &str) -> Result<Vec<f64>, Failure> {
    let raw = entries.require(key)?.to_string();
    let line = entries.line_of(key);
    raw.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                Failure::Config(format!("key '{key}' (line {line}): '{}' is not a number", s.trim()))
            })
        })
        .collect()
}

fn parse_usize_list(entries: &Entries, key: &str) -> Result<Vec<usize>, Failure> {
    let raw = entries.get(key).map(str::to_string);
    let line = entries.line_of(key);
    match raw {
        None => Ok(Vec::new()),
        Some(raw) => raw
            .split(',')
            .map(|s| {
                s.trim().parse::<usize>().map_err(|_| {
                    Failure::Config(format!(
                        "key '{key}' (line {line}): '{}' is not a non-negative integer",
                        s.trim()
                    ))
                })
            })
            .collect(),
    }
}

fn parse_constants(entries: &Entries) -> Result<Constants, Failure> {
    let mut k = Constants::default();
    k.c = entries.get_f64("constants.c", k.c)?;
    k.c1 = entries.get_f64("constants.c1", k.c1)?;
    k.c2 = entries.get_f64("constants.c2", k.c2)?;
    k.c3 = entries.get_f64("constants.c3", k.c3)?;
    k.c4 = entries.get_f64("constants.c4", k.c4)?;
    k.c5 = entries.get_f64("constants.c5", k.c5)?;
    k.c6 = entries.get_f64("constants.c6", k.c6)?;
    k.c7 = entries.get_f64("constants.c7", k.c7)?;
    k.c8 = entries.get_f64("constants.c8", k.c8)?;
    k.big_c = entries.get_f64("constants.C", k.big_c)?;
    Ok(k)
}

fn forcing_to_string(spec: &ForcingSpec) -> String {
    if spec.modes.is_empty() {
        return "none".to_string();
    }
    spec.modes
        .iter()
        .map(|m| format!("({},{}):{}:{}", m.k.0, m.k.1, m.amplitude, m.phase))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn echo(bundle: &SimBundle) -> BTreeMap<String, String> {
    let cfg = &bundle.cfg;
    let k = &bundle.constants;
    let mut map = BTreeMap::new();
    let mut put = |key: &str, value: String| {
        map.insert(key.to_string(), value);
    };
    put("grid.n", cfg.grid.n().to_string());
    put("grid.length", cfg.grid.length().to_string());
    put("params.nu", cfg.params.nu.to_string());
    put("params.mu", cfg.params.mu.to_string());
    put("forcing.modes", forcing_to_string(&cfg.forcing));
    put("t_end", cfg.t_end.to_string());
    put(
        "dt",
        match cfg.dt {
            Dt::Auto => "auto".to_string(),
            Dt::Fixed(h) => h.to_string(),
        },
    );
    put("spinup", cfg.spinup.to_string());
    put("sample_every", cfg.sample_every.to_string());
    put(
        "checkpoint_every",
        match cfg.checkpoint_every {
            Some(k) => k.to_string(),
            None => "none".to_string(),
        },
    );
    put("sigma1", cfg.sigma1.to_string());
    match &cfg.initial {
        Initial::Zero => put("initial", "zero".to_string()),
        Initial::SingleMode { k, amp } => {
            put("initial", "single_mode".to_string());
            put("initial.k", format!("({},{})", k.0, k.1));
            put("initial.amp", amp.to_string());
        }
        Initial::Random { seed, slope } => {
            put("initial", "random".to_string());
            put("initial.seed", seed.to_string());
            put("initial.slope", slope.to_string());
        }
    }
    if !bundle.kappas.is_empty() {
        put(
            "sync.kappa_c",
            bundle
                .kappas
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
    }
    put("constants.c", k.c.to_string());
    put("constants.c1", k.c1.to_string());
    put("constants.c2", k.c2.to_string());
    put("constants.c3", k.c3.to_string());
    put("constants.c4", k.c4.to_string());
    put("constants.c5", k.c5.to_string());
    put("constants.c6", k.c6.to_string());
    put("constants.c7", k.c7.to_string());
    put("constants.c8", k.c8.to_string());
    put("constants.C", k.big_c.to_string());
    map
}

/// Parse a configuration file, apply defaults, validate everything the
/// core would reject, and classify it as single-run or sweep.
pub fn parse_config(text: &str, seed_override: Option<u64>) -> Result<ParsedConfig, Failure> {
    let entries = Entries::parse(text)?;

    let n = {
        let raw = entries.require("grid.n")?;
        entries.usize_of("grid.n", raw)?
    };
    let length = entries.get_f64("grid.length", std::f64::consts::TAU)?;
    let grid = GridSpec::new(n, length).map_err(|e| Failure::Config(e.to_string()))?;

    let nu = entries.require_f64("params.nu")?;
    let mu = entries.require_f64("params.mu")?;
    let params = PhysParams::new(nu, mu).map_err(|e| Failure::Config(e.to_string()))?;

    let forcing = parse_forcing(&entries)?;
    let t_end = entries.require_f64("t_end")?;

    let mut cfg = SimConfig::new(grid, params, forcing, t_end);
    cfg.dt = match entries.get("dt") {
        None => Dt::Auto,
        Some("auto") => Dt::Auto,
        Some(raw) => Dt::Fixed(entries.f64_of("dt", raw)?),
    };
    cfg.spinup = entries.get_f64("spinup", cfg.spinup)?;
    cfg.sample_every = entries.get_usize("sample_every", cfg.sample_every)?;
    cfg.checkpoint_every = match entries.get("checkpoint_every") {
        None => None,
        Some("none") => None,
        Some(raw) => Some(entries.usize_of("checkpoint_every", raw)?),
    };
    cfg.sigma1 = entries.get_f64("sigma1", cfg.sigma1)?;
    cfg.initial = parse_initial(&entries)?;
    if let Some(seed) = seed_override {
        if let Initial::Random { slope, .. } = cfg.initial {
            cfg.initial = Initial::Random { seed, slope };
        }
    }

    let constants = parse_constants(&entries)?;
    let kappas = parse_usize_list(&entries, "sync.kappa_c")?;

    let is_sweep = entries.any_with_prefix("sweep.");
    let sweep_parts = if is_sweep {
        let nu_values = parse_f64_list(&entries, "sweep.nu_values")?;
        let n_values = if entries.has("sweep.n_values") {
            Some(parse_usize_list(&entries, "sweep.n_values")?)
        } else {
            None
        };
        let spread_factor = entries.get_f64("sweep.spread_factor", 3.0)?;
        Some((nu_values, n_values, spread_factor))
    } else {
        None
    };

    entries.finish()?;

    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    // surface out-of-band forcing modes now rather than mid-command
    build_forcing(&cfg.forcing, cfg.grid).map_err(|e| Failure::Config(e.to_string()))?;

    let mut bundle = SimBundle { cfg, constants, kappas, resolved: BTreeMap::new() };
    bundle.resolved = echo(&bundle);

    match sweep_parts {
        None => Ok(ParsedConfig::Sim(bundle)),
        Some((nu_values, n_values, spread_factor)) => {
            bundle.resolved.insert(
                "sweep.nu_values".to_string(),
                nu_values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
            );
            bundle.resolved.insert(
                "sweep.n_values".to_string(),
                match &n_values {
                    Some(ns) => ns.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
                    None => "auto".to_string(),
                },
            );
            bundle
                .resolved
                .insert("sweep.spread_factor".to_string(), spread_factor.to_string());
            Ok(ParsedConfig::Sweep(SweepBundle {
                sim: bundle,
                nu_values,
                n_values,
                spread_factor,
            }))
        }
    }
}
